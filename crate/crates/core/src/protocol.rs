//! Request and response bodies of the HTTP API, shared by server and client.

use serde::{Deserialize, Serialize};

use crate::model::{IterationRecord, ProjectState, RequirementId, Violation};
use crate::optimizer::PlanSolution;
use crate::planner::{Engine, FitnessOverrides, GaOverrides, PlanRequest};

pub const API_PREFIX: &str = "/api/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectEnvelope {
    pub id: String,
    pub project: ProjectState,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: String,
    pub requirements: usize,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_iteration: Option<u32>,
    pub complete: bool,
}

impl ProjectSummary {
    pub fn of(id: &str, p: &ProjectState) -> Self {
        let current = p.current_index();
        Self {
            id: id.to_string(),
            requirements: p.requirements.len(),
            iterations: p.iterations.len(),
            current_iteration: current,
            complete: current.is_none() && !p.iterations.is_empty(),
        }
    }
}

/// Plan request body; the iteration comes from the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBody {
    pub t_max: f64,
    #[serde(default)]
    pub fitness: FitnessOverrides,
    #[serde(default)]
    pub ga: GaOverrides,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub replan: bool,
}

impl PlanBody {
    pub fn new(t_max: f64) -> Self {
        Self {
            t_max,
            fitness: FitnessOverrides::default(),
            ga: GaOverrides::default(),
            engine: Engine::Auto,
            replan: false,
        }
    }

    pub fn into_request(self, iteration: u32) -> PlanRequest {
        PlanRequest {
            iteration,
            t_max: self.t_max,
            fitness: self.fitness,
            ga: self.ga,
            engine: self.engine,
            replan: self.replan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub iteration: u32,
    pub t_max: f64,
    pub ff_applied: f64,
    pub candidates: Vec<RequirementId>,
    pub solutions: Vec<PlanSolution>,
}

impl PlanResponse {
    pub fn of(it: &IterationRecord) -> Self {
        Self {
            iteration: it.index,
            t_max: it.t_max.unwrap_or_default(),
            ff_applied: it.ff_applied,
            candidates: it.candidates.clone(),
            solutions: it.solutions.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChooseBody {
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChooseResponse {
    pub iteration: u32,
    pub index: usize,
    pub selected: Vec<RequirementId>,
    pub cycle_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeResponse {
    pub iteration: u32,
    pub ff: f64,
    /// The iteration opened for the remaining requirements, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next: Option<IterationRecord>,
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    ValidationFailed,
    NotFound,
    Conflict,
    Infeasible,
    /// Storage or runtime failure on the server side.
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ValidationFailed => "validation_failed",
            Self::NotFound => "not_found",
            Self::Conflict => "conflict",
            Self::Infeasible => "infeasible",
            Self::Internal => "internal",
        }
    }
}

/// Error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}
