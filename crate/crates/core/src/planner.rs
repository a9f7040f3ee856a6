//! The iterative planning loop over a persisted [`ProjectState`]:
//! plan an increment, let a human choose a solution, record the release
//! outcome, and open the next increment with the remaining requirements.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::estimation::{hours_per_weight, ClusterSpec, EstimationError, UcpBreakdown};
use crate::feedback::{apply_feedback, compute_ff, FeedbackError, PlanningInputs, ReleaseOutcome};
use crate::model::{
    validate_project, ClusterLabel, IterationRecord, Origin, ProjectState, RatingMatrices, RecordedOutcome,
    Requirement, RequirementId, ValidationReport,
};
use crate::optimizer::{
    brute_force_plan, min_note, run_ga, BenefitForm, FitnessConfig, GaConfig, OptimizerError, PlanProblem, PlanSolution,
};
use crate::stakeholders::{compute_lambda, ComparisonMatrix};

/// Candidate count up to which `Engine::Auto` enumerates exhaustively.
pub const AUTO_EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("project is invalid: {0}")]
    Validation(ValidationReport),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("requirements without an effort estimate and no estimation inputs: {}", join(.0))]
    Unestimated(Vec<RequirementId>),
    #[error("no selection fits {t_max} hours{}", min_note(*.min_hours))]
    Infeasible { t_max: f64, min_hours: Option<f64> },
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Optimizer(OptimizerError),
}

fn join(ids: &[RequirementId]) -> String {
    ids.iter().map(|id| id.as_str()).collect::<Vec<_>>().join(", ")
}

impl From<OptimizerError> for PlanError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Infeasible { t_max, min_hours } => Self::Infeasible { t_max, min_hours },
            other => Self::Optimizer(other),
        }
    }
}

impl PlanError {
    /// Machine token used by the HTTP layer and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotFound(_) => "not_found",
            Self::Conflict(_) => "conflict",
            Self::Infeasible { .. } => "infeasible",
            _ => "validation_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Exhaustive up to [`AUTO_EXHAUSTIVE_LIMIT`] candidates, genetic above.
    #[default]
    Auto,
    Exhaustive,
    Genetic,
}

/// Per-request changes to the project's fitness settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_best: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit_form: Option<BenefitForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl FitnessOverrides {
    pub fn apply(&self, base: &FitnessConfig) -> FitnessConfig {
        FitnessConfig {
            alphas: self.alphas.clone().unwrap_or_else(|| base.alphas.clone()),
            k_best: self.k_best.unwrap_or(base.k_best),
            benefit_form: self.benefit_form.unwrap_or(base.benefit_form),
            delta: self.delta.or(base.delta),
        }
    }
}

/// Per-request changes to the genetic search settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stagnation_window: Option<usize>,
    /// Replaces the project seed for this run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub iteration: u32,
    pub t_max: f64,
    #[serde(default)]
    pub fitness: FitnessOverrides,
    #[serde(default)]
    pub ga: GaOverrides,
    #[serde(default)]
    pub engine: Engine,
    /// Allows planning an iteration again while no solution has been chosen.
    #[serde(default)]
    pub replan: bool,
}

impl PlanRequest {
    pub fn new(iteration: u32, t_max: f64) -> Self {
        Self {
            iteration,
            t_max,
            fitness: FitnessOverrides::default(),
            ga: GaOverrides::default(),
            engine: Engine::Auto,
            replan: false,
        }
    }
}

/// UCP total and the per-requirement hours derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub breakdown: UcpBreakdown,
    pub hours_per_weight: f64,
    pub hours: BTreeMap<RequirementId, f64>,
}

/// Splits the project's UCP total over its non-defect requirements by cluster
/// weight. Defects are priced at the same hours per weight unit.
pub fn estimate_project(state: &ProjectState) -> Result<EstimateReport, PlanError> {
    let est = state
        .estimation
        .as_ref()
        .ok_or_else(|| PlanError::Invalid("project has no estimation inputs".into()))?;
    let breakdown = est.breakdown()?;
    let spec = ClusterSpec::from_requirements(
        &est.clusters,
        state.requirements.iter().filter(|r| r.origin != Origin::Defect),
    )?;
    let unit = hours_per_weight(breakdown.ucp, &spec)?;
    let weight = |label: &ClusterLabel, id: &RequirementId| {
        est.clusters
            .iter()
            .find(|c| &c.label == label)
            .map(|c| c.weight)
            .ok_or_else(|| EstimationError::UnknownCluster {
                id: id.clone(),
                label: label.clone(),
            })
    };
    let mut hours = BTreeMap::new();
    for r in &state.requirements {
        hours.insert(r.id.clone(), unit * weight(&r.cluster, &r.id)?);
    }
    Ok(EstimateReport {
        breakdown,
        hours_per_weight: unit,
        hours,
    })
}

/// Fills every missing `estimated_hours` from the UCP split. Existing
/// estimates are kept.
pub fn fill_estimates(state: &ProjectState) -> Result<ProjectState, PlanError> {
    let missing: Vec<RequirementId> = state
        .requirements
        .iter()
        .filter(|r| r.estimated_hours.is_none())
        .map(|r| r.id.clone())
        .collect();
    if missing.is_empty() {
        return Ok(state.clone());
    }
    if state.estimation.is_none() {
        return Err(PlanError::Unestimated(missing));
    }
    let report = estimate_project(state)?;
    let mut next = state.clone();
    for r in next.requirements.iter_mut().filter(|r| r.estimated_hours.is_none()) {
        r.estimated_hours = Some(report.hours[&r.id]);
    }
    Ok(next)
}

fn check_valid(state: &ProjectState) -> Result<(), PlanError> {
    let report = validate_project(state);
    if report.is_valid() {
        Ok(())
    } else {
        Err(PlanError::Validation(report))
    }
}

/// Position of the open iteration `k`, creating iteration 1 on a fresh project.
fn open_iteration(state: &mut ProjectState, k: u32) -> Result<usize, PlanError> {
    let current = state
        .current_index()
        .ok_or_else(|| PlanError::Conflict("every requirement has been consumed; nothing left to plan".into()))?;
    if k != current {
        return Err(if k == 0 || k as usize > state.iterations.len().max(1) {
            PlanError::NotFound(format!("iteration {k} does not exist; the open iteration is {current}"))
        } else {
            PlanError::Conflict(format!("iteration {k} is not open; the open iteration is {current}"))
        });
    }
    if state.iterations.is_empty() {
        let candidates = state.requirements.iter().map(|r| r.id.clone()).collect();
        state.iterations.push(IterationRecord::opened(1, candidates, 1.0));
    }
    Ok(state.iterations.len() - 1)
}

/// Builds the optimisation problem for one iteration: candidate base times and
/// rating columns, scaled by the iteration's feedback factor where re-implemented.
pub fn build_problem(
    state: &ProjectState,
    it: &IterationRecord,
    t_max: f64,
    fitness: FitnessConfig,
) -> Result<PlanProblem, PlanError> {
    let comparison = ComparisonMatrix::new(state.comparison.clone()).map_err(|e| PlanError::Invalid(e.to_string()))?;
    let lambda = compute_lambda(&comparison);
    let mut columns = Vec::with_capacity(it.candidates.len());
    let mut times = Vec::with_capacity(it.candidates.len());
    let mut reimplemented = BTreeSet::new();
    let mut unestimated = Vec::new();
    for id in &it.candidates {
        let idx = state
            .requirement_index(id)
            .ok_or_else(|| PlanError::Invalid(format!("candidate {id} is not a requirement")))?;
        let r = &state.requirements[idx];
        match r.estimated_hours {
            Some(h) => times.push(h),
            None => unestimated.push(id.clone()),
        }
        if r.reimplemented {
            reimplemented.insert(id.clone());
        }
        columns.push(idx);
    }
    if !unestimated.is_empty() {
        return Err(PlanError::Unestimated(unestimated));
    }
    let tables = &state.matrices;
    let all = RatingMatrices::new(
        tables.prio.clone(),
        tables.value.clone(),
        tables.value_scale_max,
        lambda,
    )
    .map_err(|e| PlanError::Invalid(e.to_string()))?;
    let inputs = PlanningInputs {
        candidates: it.candidates.clone(),
        times,
        matrices: all.select_columns(&columns),
    };
    let scaled = apply_feedback(&inputs, &reimplemented, it.ff_applied)?;
    let keep: HashSet<&RequirementId> = it.candidates.iter().collect();
    Ok(PlanProblem::new(
        scaled.candidates,
        scaled.times,
        t_max,
        state.constraints.restrict_to(&keep),
        scaled.matrices,
        fitness,
    )?)
}

/// Ranks selections for the open iteration and stores them on it.
pub fn plan_iteration(state: &ProjectState, req: &PlanRequest) -> Result<ProjectState, PlanError> {
    check_valid(state)?;
    if !(req.t_max > 0.0 && req.t_max.is_finite()) {
        return Err(PlanError::Invalid(format!("t_max must be positive, got {}", req.t_max)));
    }
    let mut next = fill_estimates(state)?;
    let pos = open_iteration(&mut next, req.iteration)?;
    let it = &next.iterations[pos];
    if it.chosen.is_some() {
        return Err(PlanError::Conflict(format!(
            "iteration {} already has a chosen solution",
            it.index
        )));
    }
    if !it.solutions.is_empty() && !req.replan {
        return Err(PlanError::Conflict(format!(
            "iteration {} is already planned",
            it.index
        )));
    }

    let fitness = req.fitness.apply(&next.optimizer.fitness);
    let problem = build_problem(&next, it, req.t_max, fitness)?;
    let exhaustive = match req.engine {
        Engine::Auto => problem.len() <= AUTO_EXHAUSTIVE_LIMIT,
        Engine::Exhaustive => true,
        Engine::Genetic => false,
    };
    let solutions = if exhaustive {
        brute_force_plan(&problem)?
    } else {
        let settings = next.optimizer.ga;
        let g = &req.ga;
        let cfg = GaConfig {
            population_size: g.population_size.unwrap_or(settings.population_size),
            crossover_rate: g.crossover_rate.unwrap_or(settings.crossover_rate),
            mutation_rate: g.mutation_rate.unwrap_or(settings.mutation_rate),
            max_generations: g.max_generations.unwrap_or(settings.max_generations),
            stagnation_window: g.stagnation_window.unwrap_or(settings.stagnation_window),
            rng_seed: g.rng_seed.unwrap_or(next.rng_seed).wrapping_add(u64::from(it.index)),
        };
        run_ga(&problem, &cfg)?
    };

    let it = &mut next.iterations[pos];
    it.t_max = Some(req.t_max);
    it.solutions = solutions;
    Ok(next)
}

/// Marks solution `index` of iteration `k` as the human choice.
pub fn choose_solution(state: &ProjectState, k: u32, index: usize) -> Result<ProjectState, PlanError> {
    let mut next = state.clone();
    let it = next
        .iterations
        .iter_mut()
        .find(|it| it.index == k)
        .ok_or_else(|| PlanError::NotFound(format!("iteration {k} does not exist")))?;
    if it.chosen.is_some() {
        return Err(PlanError::Conflict(format!(
            "iteration {k} already has a chosen solution"
        )));
    }
    if it.solutions.is_empty() {
        return Err(PlanError::Conflict(format!("iteration {k} has not been planned")));
    }
    let sol = it.solutions.get(index).ok_or_else(|| {
        PlanError::NotFound(format!(
            "iteration {k} has {} solutions, no index {index}",
            it.solutions.len()
        ))
    })?;
    it.cycle_hours = Some(sol.total_hours);
    it.chosen = Some(index);
    Ok(next)
}

/// A requirement discovered as a defect during a release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewDefect {
    pub id: RequirementId,
    #[serde(default)]
    pub title: String,
    pub cluster: ClusterLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_hours: Option<f64>,
    /// One priority per stakeholder.
    pub prio: Vec<f64>,
    /// One value per stakeholder.
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeInput {
    pub actual_hours: f64,
    pub user_perception: f64,
    /// Defaults to the chosen solution's cycle hours.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_hours: Option<f64>,
    #[serde(default)]
    pub failed: Vec<RequirementId>,
    #[serde(default)]
    pub defects: Vec<NewDefect>,
}

/// Closes iteration `k` with its measured outcome and opens the next one with
/// every requirement not yet implemented, or ends the loop when none remain.
pub fn record_outcome(state: &ProjectState, k: u32, input: &OutcomeInput) -> Result<ProjectState, PlanError> {
    let mut next = state.clone();
    let pos = next
        .iterations
        .iter()
        .position(|it| it.index == k)
        .ok_or_else(|| PlanError::NotFound(format!("iteration {k} does not exist")))?;
    let it = &next.iterations[pos];
    if it.is_closed() {
        return Err(PlanError::Conflict(format!("iteration {k} already has an outcome")));
    }
    let sol = it
        .chosen_solution()
        .ok_or_else(|| PlanError::Conflict(format!("iteration {k} has no chosen solution yet")))?;

    let mut failed = Vec::new();
    for id in &input.failed {
        if !sol.selected.contains(id) {
            return Err(PlanError::Invalid(format!(
                "failed requirement {id} was not selected in iteration {k}"
            )));
        }
        if !failed.contains(id) {
            failed.push(id.clone());
        }
    }
    let outcome = ReleaseOutcome {
        actual_hours: input.actual_hours,
        estimated_hours: input.estimated_hours.or(it.cycle_hours).unwrap_or(sol.total_hours),
        failed_count: failed.len() as u32,
        implemented_count: sol.selected.len() as u32,
        user_perception: input.user_perception,
    };
    let ff = compute_ff(&outcome, &next.feedback)?;

    let q = next.stakeholders.len();
    let mut defect_ids = Vec::new();
    for d in &input.defects {
        if next.requirement(&d.id).is_some() || defect_ids.contains(&d.id) {
            return Err(PlanError::Invalid(format!("defect id {} is already in use", d.id)));
        }
        if d.prio.len() != q || d.value.len() != q {
            return Err(PlanError::Invalid(format!(
                "defect {} needs one prio and one value per stakeholder ({q})",
                d.id
            )));
        }
        defect_ids.push(d.id.clone());
    }
    for r in next.requirements.iter_mut().filter(|r| failed.contains(&r.id)) {
        r.reimplemented = true;
        if r.origin == Origin::New {
            r.origin = Origin::Carryover;
        }
    }
    for d in &input.defects {
        next.requirements.push(Requirement {
            id: d.id.clone(),
            title: d.title.clone(),
            cluster: d.cluster.clone(),
            estimated_hours: d.estimated_hours,
            origin: Origin::Defect,
            reimplemented: true,
        });
        for (row, x) in next.matrices.prio.iter_mut().zip(&d.prio) {
            row.push(*x);
        }
        for (row, x) in next.matrices.value.iter_mut().zip(&d.value) {
            row.push(*x);
        }
    }

    let it = &mut next.iterations[pos];
    it.failed = failed;
    it.defects = defect_ids;
    it.outcome = Some(RecordedOutcome {
        actual_hours: outcome.actual_hours,
        estimated_hours: outcome.estimated_hours,
        failed_count: outcome.failed_count,
        implemented_count: outcome.implemented_count,
        user_perception: outcome.user_perception,
        ff,
    });
    let pending = next.pending();
    if !pending.is_empty() {
        next.iterations.push(IterationRecord::opened(k + 1, pending, ff));
    }
    check_valid(&next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterationStatus {
    Open,
    Planned,
    Chosen,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub index: u32,
    pub status: IterationStatus,
    pub candidates: Vec<RequirementId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub solutions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Vec<RequirementId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_hours: Option<f64>,
    /// Factor applied to this iteration's re-implemented candidates.
    pub ff_applied: f64,
    /// Factor derived from this iteration's outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ff: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<RequirementId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defects: Vec<RequirementId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub rows: Vec<TimelineRow>,
    pub implemented: Vec<RequirementId>,
    pub pending: Vec<RequirementId>,
    /// Every requirement implemented and no iteration left open.
    pub complete: bool,
}

pub fn project_timeline(state: &ProjectState) -> Timeline {
    let rows = state
        .iterations
        .iter()
        .map(|it| {
            let status = if it.is_closed() {
                IterationStatus::Closed
            } else if it.chosen.is_some() {
                IterationStatus::Chosen
            } else if !it.solutions.is_empty() {
                IterationStatus::Planned
            } else {
                IterationStatus::Open
            };
            TimelineRow {
                index: it.index,
                status,
                candidates: it.candidates.clone(),
                t_max: it.t_max,
                solutions: it.solutions.len(),
                chosen: it.chosen_solution().map(|s: &PlanSolution| s.selected.clone()),
                cycle_hours: it.cycle_hours,
                ff_applied: it.ff_applied,
                ff: it.outcome.as_ref().map(|o| o.ff),
                failed: it.failed.clone(),
                defects: it.defects.clone(),
            }
        })
        .collect();
    let pending = state.pending();
    Timeline {
        rows,
        implemented: state.implemented().into_iter().collect(),
        complete: !state.iterations.is_empty() && pending.is_empty(),
        pending,
    }
}
