//! Stakeholder weights from a pairwise comparison matrix.
//!
//! Weights are approximated by normalising each column to sum 1 and averaging
//! the rows of the result. Reciprocity of the input is not required.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComparisonError {
    #[error("comparison matrix is empty")]
    Empty,
    #[error("comparison matrix must be square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("comparison entry ({row},{col}) must be positive, got {value}")]
    NonPositive { row: usize, col: usize, value: f64 },
    #[error("comparison diagonal entry ({0},{0}) must be 1, got {1}")]
    Diagonal(usize, f64),
}

/// Square matrix where entry `(p, r)` rates stakeholder `p` against `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ComparisonMatrix(Vec<Vec<f64>>);

impl ComparisonMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ComparisonError> {
        let q = rows.len();
        if q == 0 {
            return Err(ComparisonError::Empty);
        }
        for (row, entries) in rows.iter().enumerate() {
            if entries.len() != q {
                return Err(ComparisonError::NotSquare {
                    row,
                    len: entries.len(),
                    expected: q,
                });
            }
            for (col, &value) in entries.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ComparisonError::NonPositive { row, col, value });
                }
                if row == col && value != 1.0 {
                    return Err(ComparisonError::Diagonal(row, value));
                }
            }
        }
        Ok(Self(rows))
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }
}

impl TryFrom<Vec<Vec<f64>>> for ComparisonMatrix {
    type Error = ComparisonError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::new(rows)
    }
}

impl From<ComparisonMatrix> for Vec<Vec<f64>> {
    fn from(m: ComparisonMatrix) -> Self {
        m.0
    }
}

pub fn compute_lambda(m: &ComparisonMatrix) -> Vec<f64> {
    let q = m.size();
    let col_sums: Vec<f64> = (0..q).map(|c| m.0.iter().map(|row| row[c]).sum()).collect();
    m.0.iter()
        .map(|row| row.iter().zip(&col_sums).map(|(x, s)| x / s).sum::<f64>() / q as f64)
        .collect()
}
