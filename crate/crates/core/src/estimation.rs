//! Use Case Points effort estimation and its weighted split over size clusters.
//!
//! Total effort is `TCF * ECF * UUCP * PF`. Each requirement then receives
//! `T * w / sum(count_c * w_c)` where `w` is the weight of its cluster.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{ClusterLabel, Requirement, RequirementId};

/// Weights of the thirteen technical factors T1..T13.
pub const TECHNICAL_WEIGHTS: [f64; 13] = [2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0];
/// Weights of the eight environmental factors E1..E8.
pub const ENVIRONMENTAL_WEIGHTS: [f64; 8] = [1.5, 0.5, 1.0, 0.5, 1.0, 2.0, -1.0, 2.0];

const USE_CASE_WEIGHTS: [f64; 3] = [5.0, 10.0, 15.0];
const ACTOR_WEIGHTS: [f64; 3] = [1.0, 2.0, 3.0];
const MAX_PERCEIVED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("{kind} factors need exactly {expected} entries, got {got}")]
    FactorCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{kind} factor {index} = {value} is outside [0, 5]")]
    FactorRange {
        kind: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("cluster {label} has non-positive weight {weight}")]
    ClusterWeight { label: ClusterLabel, weight: f64 },
    #[error("cluster {0} is declared twice")]
    DuplicateCluster(ClusterLabel),
    #[error("requirement {id} is in undeclared cluster {label}")]
    UnknownCluster { id: RequirementId, label: ClusterLabel },
    #[error("requirement {0} is a member of more than one cluster")]
    MultipleClusters(RequirementId),
    #[error("no requirements to distribute time over")]
    NoRequirements,
}

fn check_factors(kind: &'static str, values: &[f64], expected: usize) -> Result<(), EstimationError> {
    if values.len() != expected {
        return Err(EstimationError::FactorCount {
            kind,
            expected,
            got: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && **v <= MAX_PERCEIVED))
    {
        return Err(EstimationError::FactorRange { kind, index, value });
    }
    Ok(())
}

/// Perceived complexity (0..=5) for each technical factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechnicalFactors([f64; 13]);

impl TechnicalFactors {
    pub fn new(perceived: &[f64]) -> Result<Self, EstimationError> {
        check_factors("technical", perceived, 13)?;
        let mut a = [0.0; 13];
        a.copy_from_slice(perceived);
        Ok(Self(a))
    }

    pub fn total(&self) -> f64 {
        weighted_sum(&TECHNICAL_WEIGHTS, &self.0)
    }
}

/// Perceived impact (0..=5) for each environmental factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentalFactors([f64; 8]);

impl EnvironmentalFactors {
    pub fn new(perceived: &[f64]) -> Result<Self, EstimationError> {
        check_factors("environmental", perceived, 8)?;
        let mut a = [0.0; 8];
        a.copy_from_slice(perceived);
        Ok(Self(a))
    }

    pub fn total(&self) -> f64 {
        weighted_sum(&ENVIRONMENTAL_WEIGHTS, &self.0)
    }
}

fn weighted_sum(weights: &[f64], perceived: &[f64]) -> f64 {
    weights.iter().zip(perceived).map(|(w, p)| w * p).sum()
}

pub fn compute_tcf(tf: &TechnicalFactors) -> f64 {
    0.6 + 0.01 * tf.total()
}

pub fn compute_ecf(ef: &EnvironmentalFactors) -> f64 {
    1.4 - 0.03 * ef.total()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexityCounts {
    pub simple: u32,
    pub average: u32,
    pub complex: u32,
}

impl ComplexityCounts {
    pub fn new(simple: u32, average: u32, complex: u32) -> Self {
        Self {
            simple,
            average,
            complex,
        }
    }

    fn weighted(&self, weights: [f64; 3]) -> f64 {
        weights[0] * f64::from(self.simple)
            + weights[1] * f64::from(self.average)
            + weights[2] * f64::from(self.complex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UseCaseInventory {
    pub use_cases: ComplexityCounts,
    pub actors: ComplexityCounts,
}

impl UseCaseInventory {
    pub fn uucw(&self) -> f64 {
        self.use_cases.weighted(USE_CASE_WEIGHTS)
    }

    pub fn uaw(&self) -> f64 {
        self.actors.weighted(ACTOR_WEIGHTS)
    }
}

pub fn compute_uucp(inv: &UseCaseInventory) -> f64 {
    inv.uucw() + inv.uaw()
}

/// Total effort in hours. Not rounded.
pub fn compute_ucp(tcf: f64, ecf: f64, uucp: f64, pf: f64) -> Result<f64, EstimationError> {
    for (name, value) in [("TCF", tcf), ("ECF", ecf), ("UUCP", uucp), ("PF", pf)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(EstimationError::NonPositive { name, value });
        }
    }
    Ok(tcf * ecf * uucp * pf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterWeight {
    pub label: ClusterLabel,
    pub weight: f64,
}

pub fn default_clusters() -> Vec<ClusterWeight> {
    vec![
        ClusterWeight {
            label: ClusterLabel::small(),
            weight: 1.0,
        },
        ClusterWeight {
            label: ClusterLabel::medium(),
            weight: 2.0,
        },
        ClusterWeight {
            label: ClusterLabel::big(),
            weight: 3.0,
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: ClusterLabel,
    pub weight: f64,
    pub members: Vec<RequirementId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterSpec {
    pub clusters: Vec<Cluster>,
}

impl ClusterSpec {
    /// Groups `requirements` by their cluster label using the declared weights.
    pub fn from_requirements<'a>(
        weights: &[ClusterWeight],
        requirements: impl IntoIterator<Item = &'a Requirement>,
    ) -> Result<Self, EstimationError> {
        let mut clusters: Vec<Cluster> = weights
            .iter()
            .map(|w| Cluster {
                label: w.label.clone(),
                weight: w.weight,
                members: Vec::new(),
            })
            .collect();
        for r in requirements {
            let cluster =
                clusters
                    .iter_mut()
                    .find(|c| c.label == r.cluster)
                    .ok_or_else(|| EstimationError::UnknownCluster {
                        id: r.id.clone(),
                        label: r.cluster.clone(),
                    })?;
            cluster.members.push(r.id.clone());
        }
        let spec = Self { clusters };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), EstimationError> {
        let mut labels = HashSet::new();
        let mut members = HashSet::new();
        for c in &self.clusters {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(EstimationError::ClusterWeight {
                    label: c.label.clone(),
                    weight: c.weight,
                });
            }
            if !labels.insert(&c.label) {
                return Err(EstimationError::DuplicateCluster(c.label.clone()));
            }
            for m in &c.members {
                if !members.insert(m) {
                    return Err(EstimationError::MultipleClusters(m.clone()));
                }
            }
        }
        Ok(())
    }

    /// `sum(count_c * weight_c)`.
    pub fn weighted_count(&self) -> f64 {
        self.clusters.iter().map(|c| c.members.len() as f64 * c.weight).sum()
    }

    pub fn weight_of(&self, label: &ClusterLabel) -> Option<f64> {
        self.clusters.iter().find(|c| &c.label == label).map(|c| c.weight)
    }
}

/// Hours carried by one unit of cluster weight when `total` is split over `clusters`.
pub fn hours_per_weight(total: f64, clusters: &ClusterSpec) -> Result<f64, EstimationError> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(EstimationError::NonPositive {
            name: "total",
            value: total,
        });
    }
    clusters.check()?;
    let denom = clusters.weighted_count();
    if denom <= 0.0 {
        return Err(EstimationError::NoRequirements);
    }
    Ok(total / denom)
}

pub fn distribute_time(total: f64, clusters: &ClusterSpec) -> Result<BTreeMap<RequirementId, f64>, EstimationError> {
    let unit = hours_per_weight(total, clusters)?;
    Ok(clusters
        .clusters
        .iter()
        .flat_map(|c| c.members.iter().map(move |id| (id.clone(), unit * c.weight)))
        .collect())
}

/// Estimation section of the project document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationInputs {
    pub technical: Vec<f64>,
    pub environmental: Vec<f64>,
    pub use_cases: ComplexityCounts,
    pub actors: ComplexityCounts,
    /// Productivity factor, hours per use case point.
    pub pf: f64,
    #[serde(default = "default_clusters")]
    pub clusters: Vec<ClusterWeight>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcpBreakdown {
    pub technical_total: f64,
    pub tcf: f64,
    pub environmental_total: f64,
    pub ecf: f64,
    pub uucw: f64,
    pub uaw: f64,
    pub uucp: f64,
    pub pf: f64,
    pub ucp: f64,
}

impl EstimationInputs {
    pub fn check(&self) -> Result<(), EstimationError> {
        TechnicalFactors::new(&self.technical)?;
        EnvironmentalFactors::new(&self.environmental)?;
        if !(self.pf > 0.0 && self.pf.is_finite()) {
            return Err(EstimationError::NonPositive {
                name: "PF",
                value: self.pf,
            });
        }
        ClusterSpec {
            clusters: self
                .clusters
                .iter()
                .map(|w| Cluster {
                    label: w.label.clone(),
                    weight: w.weight,
                    members: Vec::new(),
                })
                .collect(),
        }
        .check()
    }

    pub fn inventory(&self) -> UseCaseInventory {
        UseCaseInventory {
            use_cases: self.use_cases,
            actors: self.actors,
        }
    }

    pub fn breakdown(&self) -> Result<UcpBreakdown, EstimationError> {
        let tf = TechnicalFactors::new(&self.technical)?;
        let ef = EnvironmentalFactors::new(&self.environmental)?;
        let inv = self.inventory();
        let (tcf, ecf, uucp) = (compute_tcf(&tf), compute_ecf(&ef), compute_uucp(&inv));
        Ok(UcpBreakdown {
            technical_total: tf.total(),
            tcf,
            environmental_total: ef.total(),
            ecf,
            uucw: inv.uucw(),
            uaw: inv.uaw(),
            uucp,
            pf: self.pf,
            ucp: compute_ucp(tcf, ecf, uucp, self.pf)?,
        })
    }
}
