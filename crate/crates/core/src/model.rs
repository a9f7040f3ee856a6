//! Domain types shared by every planning stage and the persisted project document.
//!
//! Everything here is a plain value. Planner operations take a [`ProjectState`]
//! by reference and hand back a new one; nothing is mutated in place.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::estimation::EstimationInputs;
use crate::feedback::FeedbackConfig;
use crate::optimizer::{FitnessConfig, GaSettings, PlanSolution};

pub const SCHEMA_VERSION: u32 = 1;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Identifier of a requirement, unique within a project.
    RequirementId
);
string_id!(
    /// Identifier of a stakeholder, unique within a project.
    StakeholderId
);
string_id!(
    /// Size cluster a requirement belongs to (`small`, `medium`, `big`, or any
    /// additional label declared in the estimation section).
    ClusterLabel
);

impl ClusterLabel {
    pub fn small() -> Self {
        Self::from("small")
    }

    pub fn medium() -> Self {
        Self::from("medium")
    }

    pub fn big() -> Self {
        Self::from("big")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    New,
    Carryover,
    Defect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    pub id: RequirementId,
    #[serde(default)]
    pub title: String,
    pub cluster: ClusterLabel,
    /// Base estimate in hours; absent until estimation has run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_hours: Option<f64>,
    #[serde(default)]
    pub origin: Origin,
    #[serde(default)]
    pub reimplemented: bool,
}

impl Requirement {
    pub fn new(id: impl Into<RequirementId>, title: impl Into<String>, cluster: ClusterLabel) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            cluster,
            estimated_hours: None,
            origin: Origin::New,
            reimplemented: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stakeholder {
    pub id: StakeholderId,
    #[serde(default)]
    pub name: String,
}

/// Persisted stakeholder ratings. Rows follow the stakeholder list, columns
/// follow the requirement pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingTables {
    #[serde(default)]
    pub prio: Vec<Vec<f64>>,
    #[serde(default)]
    pub value: Vec<Vec<f64>>,
    #[serde(default = "default_value_scale_max")]
    pub value_scale_max: f64,
}

fn default_value_scale_max() -> f64 {
    5.0
}

impl Default for RatingTables {
    fn default() -> Self {
        Self {
            prio: Vec::new(),
            value: Vec::new(),
            value_scale_max: default_value_scale_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{matrix} matrix has {rows} rows, expected {expected}")]
    RowCount {
        matrix: &'static str,
        rows: usize,
        expected: usize,
    },
    #[error("{matrix} matrix row {row} has {cols} columns, expected {expected}")]
    ColumnCount {
        matrix: &'static str,
        row: usize,
        cols: usize,
        expected: usize,
    },
    #[error("{matrix} matrix entry ({row},{col}) = {value} is not a finite non-negative number")]
    Entry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("stakeholder weights must lie in (0,1] and sum to 1, got {0:?}")]
    Weights(Vec<f64>),
    #[error("value scale maximum must be positive, got {0}")]
    ValueScale(f64),
}

/// Stakeholder × candidate priority and value matrices plus stakeholder weights:
/// the rating input of one optimisation run.
///
/// Entries are reals. After feedback scaling they may exceed their nominal
/// scale, which is allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingMatrices {
    pub prio: Vec<Vec<f64>>,
    pub value: Vec<Vec<f64>>,
    pub value_scale_max: f64,
    pub lambda: Vec<f64>,
}

impl RatingMatrices {
    pub fn new(
        prio: Vec<Vec<f64>>,
        value: Vec<Vec<f64>>,
        value_scale_max: f64,
        lambda: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let m = Self {
            prio,
            value,
            value_scale_max,
            lambda,
        };
        let n = m.prio.first().map_or(0, Vec::len);
        m.check_shape(n)?;
        let sum: f64 = m.lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || m.lambda.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(ModelError::Weights(m.lambda));
        }
        Ok(m)
    }

    pub fn stakeholders(&self) -> usize {
        self.lambda.len()
    }

    pub fn requirements(&self) -> usize {
        self.prio.first().map_or(0, Vec::len)
    }

    /// Checks dimensions against `n` candidates and that entries are finite and
    /// non-negative. Weight normalisation is not checked here.
    pub fn check_shape(&self, n: usize) -> Result<(), ModelError> {
        let q = self.lambda.len();
        if !(self.value_scale_max > 0.0 && self.value_scale_max.is_finite()) {
            return Err(ModelError::ValueScale(self.value_scale_max));
        }
        for (matrix, rows) in [("prio", &self.prio), ("value", &self.value)] {
            if rows.len() != q {
                return Err(ModelError::RowCount {
                    matrix,
                    rows: rows.len(),
                    expected: q,
                });
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(ModelError::ColumnCount {
                        matrix,
                        row: r,
                        cols: row.len(),
                        expected: n,
                    });
                }
                if let Some((c, &v)) = row.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                    return Err(ModelError::Entry {
                        matrix,
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let pick = |rows: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|row| columns.iter().map(|&c| row[c]).collect())
                .collect()
        };
        Self {
            prio: pick(&self.prio),
            value: pick(&self.value),
            value_scale_max: self.value_scale_max,
            lambda: self.lambda.clone(),
        }
    }
}

/// Precedence pairs `(a, b)` require `a` to land no later than `b`; coupling
/// pairs require both to land in the same increment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    #[serde(default)]
    pub precedence: Vec<(RequirementId, RequirementId)>,
    #[serde(default)]
    pub coupling: Vec<(RequirementId, RequirementId)>,
}

impl ConstraintSet {
    /// Drops every pair that mentions an id outside `keep`.
    pub fn restrict_to(&self, keep: &HashSet<&RequirementId>) -> Self {
        let inside = |(a, b): &&(RequirementId, RequirementId)| keep.contains(a) && keep.contains(b);
        Self {
            precedence: self.precedence.iter().filter(inside).cloned().collect(),
            coupling: self.coupling.iter().filter(inside).cloned().collect(),
        }
    }

    /// Transitive closure of the coupling relation over `ids`. Every id appears
    /// in exactly one group; uncoupled ids form singleton groups.
    pub fn coupling_groups(&self, ids: &[RequirementId]) -> Vec<Vec<RequirementId>> {
        let index: HashMap<&RequirementId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in &self.coupling {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<RequirementId>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(id.clone());
        }
        groups.into_values().collect()
    }

    /// Returns the ids on some precedence cycle, if one exists. Self-pairs are
    /// trivially satisfiable and ignored.
    pub fn precedence_cycle(&self) -> Option<Vec<RequirementId>> {
        let mut succ: BTreeMap<&RequirementId, Vec<&RequirementId>> = BTreeMap::new();
        for (a, b) in &self.precedence {
            if a != b {
                succ.entry(a).or_default().push(b);
                succ.entry(b).or_default();
            }
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark: HashMap<&RequirementId, Mark> = succ.keys().map(|&k| (k, Mark::New)).collect();
        for &start in succ.keys() {
            if mark[start] != Mark::New {
                continue;
            }
            // iterative DFS keeping the active path
            let mut stack: Vec<(&RequirementId, usize)> = vec![(start, 0)];
            mark.insert(start, Mark::Active);
            while let Some(top) = stack.last_mut() {
                let node = top.0;
                if let Some(&child) = succ[node].get(top.1) {
                    top.1 += 1;
                    match mark[child] {
                        Mark::New => {
                            mark.insert(child, Mark::Active);
                            stack.push((child, 0));
                        }
                        Mark::Active => {
                            let from = stack.iter().position(|(n, _)| *n == child).unwrap_or(0);
                            return Some(stack[from..].iter().map(|(n, _)| (*n).clone()).collect());
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Release outcome as stored on an iteration: the five measured inputs plus the
/// feedback factor derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordedOutcome {
    pub actual_hours: f64,
    pub estimated_hours: f64,
    pub failed_count: u32,
    pub implemented_count: u32,
    pub user_perception: f64,
    pub ff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationRecord {
    pub index: u32,
    pub candidates: Vec<RequirementId>,
    /// Deadline for this increment; set when the iteration is planned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub ff_applied: f64,
    #[serde(default)]
    pub solutions: Vec<PlanSolution>,
    /// Index into `solutions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<RequirementId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub defects: Vec<RequirementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RecordedOutcome>,
}

impl IterationRecord {
    pub fn opened(index: u32, candidates: Vec<RequirementId>, ff_applied: f64) -> Self {
        Self {
            index,
            candidates,
            t_max: None,
            ff_applied,
            solutions: Vec::new(),
            chosen: None,
            cycle_hours: None,
            failed: Vec::new(),
            defects: Vec::new(),
            outcome: None,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn chosen_solution(&self) -> Option<&PlanSolution> {
        self.chosen.and_then(|i| self.solutions.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    #[serde(default)]
    pub fitness: FitnessConfig,
    #[serde(default)]
    pub ga: GaSettings,
}

/// The whole project document, persisted as one JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectState {
    pub schema_version: u32,
    #[serde(default)]
    pub requirements: Vec<Requirement>,
    #[serde(default)]
    pub stakeholders: Vec<Stakeholder>,
    /// Pairwise stakeholder comparison, row-major.
    #[serde(default)]
    pub comparison: Vec<Vec<f64>>,
    #[serde(default)]
    pub matrices: RatingTables,
    #[serde(default)]
    pub constraints: ConstraintSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationInputs>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub feedback: FeedbackConfig,
    #[serde(default)]
    pub iterations: Vec<IterationRecord>,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for ProjectState {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            requirements: Vec::new(),
            stakeholders: Vec::new(),
            comparison: Vec::new(),
            matrices: RatingTables::default(),
            constraints: ConstraintSet::default(),
            estimation: None,
            optimizer: OptimizerSettings::default(),
            feedback: FeedbackConfig::default(),
            iterations: Vec::new(),
            rng_seed: 0,
        }
    }
}

impl ProjectState {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        // Serialising plain data with string keys cannot fail.
        serde_json::to_string_pretty(self).expect("project serialises")
    }

    pub fn requirement(&self, id: &RequirementId) -> Option<&Requirement> {
        self.requirements.iter().find(|r| &r.id == id)
    }

    pub fn requirement_index(&self, id: &RequirementId) -> Option<usize> {
        self.requirements.iter().position(|r| &r.id == id)
    }

    /// Ids implemented and not reported failed across all closed iterations.
    pub fn implemented(&self) -> BTreeSet<RequirementId> {
        let mut done = BTreeSet::new();
        for it in self.iterations.iter().filter(|it| it.is_closed()) {
            if let Some(sol) = it.chosen_solution() {
                done.extend(sol.selected.iter().filter(|id| !it.failed.contains(id)).cloned());
            }
        }
        done
    }

    /// Requirements still waiting to be implemented, in pool order.
    pub fn pending(&self) -> Vec<RequirementId> {
        let done = self.implemented();
        self.requirements
            .iter()
            .filter(|r| !done.contains(&r.id))
            .map(|r| r.id.clone())
            .collect()
    }

    /// Index of the iteration that accepts the next planner action, or `None`
    /// once every requirement has been consumed.
    pub fn current_index(&self) -> Option<u32> {
        match self.iterations.last() {
            None if self.requirements.is_empty() => None,
            None => Some(1),
            Some(last) if !last.is_closed() => Some(last.index),
            Some(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    SchemaVersion,
    DuplicateRequirement,
    DuplicateStakeholder,
    NegativeEstimate,
    DefectNotReimplemented,
    UnknownCluster,
    MatrixShape,
    MatrixEntry,
    ComparisonShape,
    ComparisonEntry,
    ComparisonDiagonal,
    ComparisonReciprocity,
    UnknownConstraintId,
    PrecedenceCycle,
    IterationSequence,
    MultipleOpenIterations,
    IterationCandidate,
    IterationDeadline,
    IterationFeedback,
    ChosenOutOfRange,
    OutcomeWithoutChoice,
    Estimation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<String>,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, ids: Vec<String>, message: impl Into<String>) -> Self {
        Self {
            rule,
            ids,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Advisory findings that do not make the project invalid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(&v.message)?;
        }
        Ok(())
    }
}

/// Relative deviation from reciprocity above which a comparison pair is flagged.
const RECIPROCITY_TOLERANCE: f64 = 0.10;

/// Checks every document invariant. Violations are data: an empty report means
/// the project is valid.
pub fn validate_project(state: &ProjectState) -> ValidationReport {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;

    if state.schema_version != SCHEMA_VERSION {
        v.push(Violation::new(
            Rule::SchemaVersion,
            vec![],
            format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                state.schema_version
            ),
        ));
    }

    let mut seen = HashSet::new();
    for r in &state.requirements {
        if !seen.insert(&r.id) {
            v.push(Violation::new(
                Rule::DuplicateRequirement,
                vec![r.id.0.clone()],
                format!("requirement id {} is not unique", r.id),
            ));
        }
        if let Some(h) = r.estimated_hours {
            if !(h.is_finite() && h >= 0.0) {
                v.push(Violation::new(
                    Rule::NegativeEstimate,
                    vec![r.id.0.clone()],
                    format!("requirement {} has invalid estimate {h}", r.id),
                ));
            }
        }
        if r.origin == Origin::Defect && !r.reimplemented {
            v.push(Violation::new(
                Rule::DefectNotReimplemented,
                vec![r.id.0.clone()],
                format!("defect requirement {} must be flagged reimplemented", r.id),
            ));
        }
    }
    let ids: HashSet<&RequirementId> = state.requirements.iter().map(|r| &r.id).collect();

    let mut seen = HashSet::new();
    for s in &state.stakeholders {
        if !seen.insert(&s.id) {
            v.push(Violation::new(
                Rule::DuplicateStakeholder,
                vec![s.id.0.clone()],
                format!("stakeholder id {} is not unique", s.id),
            ));
        }
    }

    let q = state.stakeholders.len();
    let n = state.requirements.len();
    check_ratings(state, q, n, v);
    check_comparison(&state.comparison, q, &mut report);
    let v = &mut report.violations;

    for (kind, pairs) in [
        ("precedence", &state.constraints.precedence),
        ("coupling", &state.constraints.coupling),
    ] {
        for (a, b) in pairs {
            for id in [a, b] {
                if !ids.contains(id) {
                    v.push(Violation::new(
                        Rule::UnknownConstraintId,
                        vec![id.0.clone()],
                        format!("{kind} pair ({a},{b}) references unknown requirement {id}"),
                    ));
                }
            }
        }
    }
    if let Some(cycle) = state.constraints.precedence_cycle() {
        let names: Vec<String> = cycle.iter().map(|id| id.0.clone()).collect();
        v.push(Violation::new(
            Rule::PrecedenceCycle,
            names.clone(),
            format!("precedence cycle through {}", names.join(" -> ")),
        ));
    }

    if let Some(est) = &state.estimation {
        if let Err(e) = est.check() {
            v.push(Violation::new(Rule::Estimation, vec![], e.to_string()));
        }
        let labels: HashSet<&ClusterLabel> = est.clusters.iter().map(|c| &c.label).collect();
        for r in state.requirements.iter().filter(|r| !labels.contains(&r.cluster)) {
            v.push(Violation::new(
                Rule::UnknownCluster,
                vec![r.id.0.clone()],
                format!("requirement {} is in undeclared cluster {}", r.id, r.cluster),
            ));
        }
    }

    check_iterations(state, &ids, v);
    report
}

fn check_ratings(state: &ProjectState, q: usize, n: usize, v: &mut Vec<Violation>) {
    let m = &state.matrices;
    if !(m.value_scale_max > 0.0 && m.value_scale_max.is_finite()) {
        v.push(Violation::new(
            Rule::MatrixEntry,
            vec![],
            format!("value_scale_max must be positive, got {}", m.value_scale_max),
        ));
    }
    for (name, rows) in [("prio", &m.prio), ("value", &m.value)] {
        if rows.len() != q || rows.iter().any(|row| row.len() != n) {
            v.push(Violation::new(
                Rule::MatrixShape,
                vec![],
                format!("{name} matrix must be {q} stakeholders x {n} requirements"),
            ));
            continue;
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                let ok = x.is_finite() && if name == "prio" { x > 0.0 } else { x >= 0.0 };
                if !ok {
                    v.push(Violation::new(
                        Rule::MatrixEntry,
                        vec![state.stakeholders[r].id.0.clone(), state.requirements[c].id.0.clone()],
                        format!(
                            "{name} entry for ({}, {}) is invalid: {x}",
                            state.stakeholders[r].id, state.requirements[c].id
                        ),
                    ));
                }
            }
        }
    }
}

fn check_comparison(m: &[Vec<f64>], q: usize, report: &mut ValidationReport) {
    if m.len() != q || m.iter().any(|row| row.len() != q) {
        report.violations.push(Violation::new(
            Rule::ComparisonShape,
            vec![],
            format!("comparison matrix must be {q}x{q}"),
        ));
        return;
    }
    for (p, row) in m.iter().enumerate() {
        for (r, &x) in row.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                report.violations.push(Violation::new(
                    Rule::ComparisonEntry,
                    vec![],
                    format!("comparison entry ({p},{r}) must be positive, got {x}"),
                ));
            } else if p == r && x != 1.0 {
                report.violations.push(Violation::new(
                    Rule::ComparisonDiagonal,
                    vec![],
                    format!("comparison diagonal entry ({p},{p}) must be 1, got {x}"),
                ));
            } else if p < r {
                let product = x * m[r][p];
                if product.is_finite() && (product - 1.0).abs() > RECIPROCITY_TOLERANCE {
                    report.warnings.push(Violation::new(
                        Rule::ComparisonReciprocity,
                        vec![],
                        format!("comparison entries ({p},{r}) and ({r},{p}) are not reciprocal: product {product:.3}"),
                    ));
                }
            }
        }
    }
}

fn check_iterations(state: &ProjectState, ids: &HashSet<&RequirementId>, v: &mut Vec<Violation>) {
    let mut open = 0;
    for (pos, it) in state.iterations.iter().enumerate() {
        let label = format!("iteration {}", it.index);
        if it.index as usize != pos + 1 {
            v.push(Violation::new(
                Rule::IterationSequence,
                vec![],
                format!(
                    "{label} found at position {}, indices must be contiguous from 1",
                    pos + 1
                ),
            ));
        }
        if !it.is_closed() {
            open += 1;
        }
        for c in it.candidates.iter().filter(|c| !ids.contains(c)) {
            v.push(Violation::new(
                Rule::IterationCandidate,
                vec![c.0.clone()],
                format!("{label} candidate {c} is not in the requirement pool"),
            ));
        }
        if let Some(t) = it.t_max {
            if !(t.is_finite() && t > 0.0) {
                v.push(Violation::new(
                    Rule::IterationDeadline,
                    vec![],
                    format!("{label} has non-positive t_max {t}"),
                ));
            }
        }
        if !(it.ff_applied > 0.0 && it.ff_applied <= 1.0) {
            v.push(Violation::new(
                Rule::IterationFeedback,
                vec![],
                format!("{label} feedback factor {} outside (0,1]", it.ff_applied),
            ));
        }
        if let Some(c) = it.chosen {
            if c >= it.solutions.len() {
                v.push(Violation::new(
                    Rule::ChosenOutOfRange,
                    vec![],
                    format!("{label} chosen index {c} but only {} solutions", it.solutions.len()),
                ));
            }
        }
        if it.outcome.is_some() && it.chosen.is_none() {
            v.push(Violation::new(
                Rule::OutcomeWithoutChoice,
                vec![],
                format!("{label} has an outcome but no chosen solution"),
            ));
        }
    }
    if open > 1 {
        v.push(Violation::new(
            Rule::MultipleOpenIterations,
            vec![],
            format!("{open} iterations are open, at most one allowed"),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: &str) -> Requirement {
        Requirement::new(id, "", ClusterLabel::small())
    }

    fn two_req_project() -> ProjectState {
        ProjectState {
            requirements: vec![req("a"), req("b")],
            stakeholders: vec![Stakeholder {
                id: "s".into(),
                name: "S".into(),
            }],
            comparison: vec![vec![1.0]],
            matrices: RatingTables {
                prio: vec![vec![1.0, 2.0]],
                value: vec![vec![3.0, 4.0]],
                value_scale_max: 5.0,
            },
            ..Default::default()
        }
    }

    #[test]
    fn empty_project_is_valid() {
        let report = validate_project(&ProjectState::default());
        assert!(report.is_valid(), "{report:?}");
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn duplicate_requirement_reported() {
        let mut p = two_req_project();
        p.requirements[1].id = "a".into();
        let report = validate_project(&p);
        assert!(report.has(Rule::DuplicateRequirement));
        assert_eq!(report.violations[0].ids, vec!["a".to_string()]);
    }

    #[test]
    fn two_cycle_reported() {
        let mut p = two_req_project();
        p.constraints.precedence = vec![("a".into(), "b".into()), ("b".into(), "a".into())];
        let report = validate_project(&p);
        assert!(report.has(Rule::PrecedenceCycle));
    }

    #[test]
    fn self_precedence_is_not_a_cycle() {
        let mut p = two_req_project();
        p.constraints.precedence = vec![("a".into(), "a".into())];
        assert!(validate_project(&p).is_valid());
    }

    #[test]
    fn longer_cycle_found() {
        let cs = ConstraintSet {
            precedence: vec![
                ("a".into(), "b".into()),
                ("b".into(), "c".into()),
                ("c".into(), "d".into()),
                ("d".into(), "b".into()),
            ],
            coupling: vec![],
        };
        let cycle = cs.precedence_cycle().unwrap();
        assert_eq!(cycle.len(), 3);
        assert!(!cycle.contains(&"a".into()));
    }

    #[test]
    fn defect_must_be_reimplemented() {
        let mut p = two_req_project();
        p.requirements[0].origin = Origin::Defect;
        assert!(validate_project(&p).has(Rule::DefectNotReimplemented));
        p.requirements[0].reimplemented = true;
        assert!(validate_project(&p).is_valid());
    }

    #[test]
    fn matrix_shape_and_entries() {
        let mut p = two_req_project();
        p.matrices.prio[0].pop();
        assert!(validate_project(&p).has(Rule::MatrixShape));
        let mut p = two_req_project();
        p.matrices.value[0][1] = -1.0;
        assert!(validate_project(&p).has(Rule::MatrixEntry));
    }

    #[test]
    fn comparison_checks() {
        let mut p = two_req_project();
        p.comparison = vec![vec![2.0]];
        assert!(validate_project(&p).has(Rule::ComparisonDiagonal));
        p.comparison = vec![vec![1.0, 1.0]];
        assert!(validate_project(&p).has(Rule::ComparisonShape));
    }

    #[test]
    fn reciprocity_is_only_a_warning() {
        let mut p = two_req_project();
        p.stakeholders.push(Stakeholder {
            id: "t".into(),
            name: "T".into(),
        });
        p.comparison = vec![vec![1.0, 2.0], vec![1.0, 1.0]];
        p.matrices.prio.push(vec![1.0, 1.0]);
        p.matrices.value.push(vec![1.0, 1.0]);
        let report = validate_project(&p);
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].rule, Rule::ComparisonReciprocity);
    }

    #[test]
    fn unknown_constraint_ids() {
        let mut p = two_req_project();
        p.constraints.coupling = vec![("a".into(), "zz".into())];
        let report = validate_project(&p);
        assert!(report.has(Rule::UnknownConstraintId));
        assert_eq!(report.violations[0].ids, vec!["zz".to_string()]);
    }

    #[test]
    fn coupling_groups_are_transitive() {
        let cs = ConstraintSet {
            precedence: vec![],
            coupling: vec![("a".into(), "b".into()), ("c".into(), "b".into())],
        };
        let ids: Vec<RequirementId> = ["a", "b", "c", "d"].into_iter().map(Into::into).collect();
        let groups = cs.coupling_groups(&ids);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].len(), 3);
        assert_eq!(groups[1], vec![RequirementId::from("d")]);
    }

    #[test]
    fn validation_is_idempotent() {
        let mut p = two_req_project();
        p.requirements[1].id = "a".into();
        let before = p.clone();
        assert_eq!(validate_project(&p), validate_project(&p));
        assert_eq!(p, before);
    }

    #[test]
    fn unknown_top_level_key_rejected() {
        let err = ProjectState::from_json(r#"{"schema_version":1,"bogus":true}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn rating_matrices_reject_unnormalised_weights() {
        let err = RatingMatrices::new(vec![vec![1.0]], vec![vec![1.0]], 5.0, vec![0.5]).unwrap_err();
        assert!(matches!(err, ModelError::Weights(_)));
    }
}
