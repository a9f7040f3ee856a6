use std::fmt::Display;

use relplan_core::planner::PlanError;

pub const VALIDATION: u8 = 1;
pub const INFEASIBLE: u8 = 2;
pub const IO: u8 = 3;

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(e: impl Display) -> Self {
        Self {
            code: VALIDATION,
            message: e.to_string(),
        }
    }

    pub fn io(e: impl Display) -> Self {
        Self {
            code: IO,
            message: e.to_string(),
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Self {
            code: if matches!(e, PlanError::Infeasible { .. }) {
                INFEASIBLE
            } else {
                VALIDATION
            },
            message: e.to_string(),
        }
    }
}
