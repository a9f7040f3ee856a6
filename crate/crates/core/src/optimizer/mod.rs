//! Requirement selection for the next release.
//!
//! A chromosome is a bit vector over the candidates: a set bit assigns the
//! candidate to the current increment (`omega = 1`), a clear bit defers it
//! (`omega = 2`). Valid chromosomes respect the time budget, precedence and
//! coupling. Fitness is the best of `C(alpha) = (alpha - 1) A + alpha B` over
//! the configured alphas, where `A` aggregates priority/ordering penalties and
//! `B` aggregates value benefits.

mod exhaustive;
mod fitness;
mod genetic;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ConstraintSet, ModelError, RatingMatrices, RequirementId};

pub use exhaustive::{
    brute_force_plan, brute_force_ranking, count_feasible, enumerate_subsets, feasible_universe, AlphaRanking, Ranking,
};
pub use fitness::{compute_benefit, compute_objective, compute_penalty, evaluate, Evaluation};
pub use genetic::{run_ga, run_ga_report, GaReport};

/// Largest candidate count for which exhaustive enumeration is allowed.
pub const MAX_EXHAUSTIVE: usize = 25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("exhaustive enumeration supports 1..={MAX_EXHAUSTIVE} candidates, got {0}; use the genetic search")]
    TooManyCandidates(usize),
    #[error("problem has no candidates")]
    NoCandidates,
    #[error("chromosome has {got} bits, problem has {expected} candidates")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0} times given for {1} candidates")]
    TimesLength(usize, usize),
    #[error("time of candidate {id} is invalid: {hours}")]
    BadTime { id: RequirementId, hours: f64 },
    #[error("deadline must be positive, got {0}")]
    BadDeadline(f64),
    #[error("candidate {0} listed twice")]
    DuplicateCandidate(RequirementId),
    #[error("constraint references {0}, which is not a candidate")]
    UnknownConstraintId(RequirementId),
    #[error(transparent)]
    Matrices(#[from] ModelError),
    #[error("alpha {0} outside [0,1]")]
    Alpha(f64),
    #[error("invalid fitness configuration: {0}")]
    Fitness(String),
    #[error("invalid genetic configuration: {0}")]
    Genetic(String),
    #[error("no selection satisfies the constraints within {t_max} hours{}", min_note(*.min_hours))]
    Infeasible { t_max: f64, min_hours: Option<f64> },
}

pub(crate) fn min_note(min_hours: Option<f64>) -> String {
    match min_hours {
        Some(h) => format!(" (smallest valid selection needs {h})"),
        None => " (no selection satisfies the constraints)".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenefitForm {
    /// `(delta - value + 1) * (tau - omega + 1)`.
    #[default]
    Literal,
    /// `value * (tau - omega + 1)`.
    Classic,
}

impl fmt::Display for BenefitForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Literal => "literal",
            Self::Classic => "classic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessConfig {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_k_best")]
    pub k_best: usize,
    #[serde(default)]
    pub benefit_form: BenefitForm,
    /// Value-scale ceiling used by the literal benefit; defaults to the
    /// matrices' `value_scale_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

fn default_alphas() -> Vec<f64> {
    vec![0.3, 0.5, 0.7]
}

fn default_k_best() -> usize {
    10
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            k_best: default_k_best(),
            benefit_form: BenefitForm::default(),
            delta: None,
        }
    }
}

impl FitnessConfig {
    pub fn check(&self) -> Result<(), OptimizerError> {
        if self.alphas.is_empty() {
            return Err(OptimizerError::Fitness("at least one alpha is required".into()));
        }
        if let Some(&a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(OptimizerError::Alpha(a));
        }
        if self.alphas.windows(2).any(|w| w[0] > w[1]) {
            return Err(OptimizerError::Fitness("alphas must be sorted ascending".into()));
        }
        if !(1..=10).contains(&self.k_best) {
            return Err(OptimizerError::Fitness(format!(
                "k_best must be in 1..=10, got {}",
                self.k_best
            )));
        }
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return Err(OptimizerError::Fitness(format!("delta must be finite, got {d}")));
            }
        }
        Ok(())
    }
}

/// Genetic search parameters as stored in a project; the seed is supplied per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSettings {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_rate")]
    pub crossover_rate: f64,
    #[serde(default = "default_rate")]
    pub mutation_rate: f64,
    #[serde(default = "default_generations")]
    pub max_generations: usize,
    #[serde(default = "default_stagnation")]
    pub stagnation_window: usize,
}

fn default_population() -> usize {
    64
}
fn default_rate() -> f64 {
    0.5
}
fn default_generations() -> usize {
    200
}
fn default_stagnation() -> usize {
    25
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            crossover_rate: default_rate(),
            mutation_rate: default_rate(),
            max_generations: default_generations(),
            stagnation_window: default_stagnation(),
        }
    }
}

impl GaSettings {
    pub fn with_seed(self, rng_seed: u64) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            max_generations: self.max_generations,
            stagnation_window: self.stagnation_window,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_generations: usize,
    pub stagnation_window: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaSettings::default().with_seed(0)
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<(), OptimizerError> {
        if self.population_size < 4 {
            return Err(OptimizerError::Genetic(format!(
                "population must be at least 4, got {}",
                self.population_size
            )));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(OptimizerError::Genetic(format!("{name} must lie in [0,1], got {r}")));
            }
        }
        if self.stagnation_window == 0 {
            return Err(OptimizerError::Genetic("stagnation_window must be positive".into()));
        }
        Ok(())
    }
}

/// One selection decision over the candidates of a [`PlanProblem`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chromosome(Vec<bool>);

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Bit `i` of `mask` selects candidate `i`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn selected_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Increment assigned to candidate `i`: 1 when selected, 2 when deferred.
    pub fn omega(&self, i: usize) -> u8 {
        if self.0[i] {
            1
        } else {
            2
        }
    }

    pub fn mask(&self) -> Option<u64> {
        (self.0.len() <= 64).then(|| self.0.iter().enumerate().fold(0, |m, (i, &b)| m | (u64::from(b) << i)))
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Inputs of one optimisation run: candidates with post-feedback times and ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProblem {
    candidates: Vec<RequirementId>,
    times: Vec<f64>,
    t_max: f64,
    constraints: ConstraintSet,
    matrices: RatingMatrices,
    fitness: FitnessConfig,
    precedence: Vec<(usize, usize)>,
    coupling: Vec<(usize, usize)>,
}

impl PlanProblem {
    pub fn new(
        candidates: Vec<RequirementId>,
        times: Vec<f64>,
        t_max: f64,
        constraints: ConstraintSet,
        matrices: RatingMatrices,
        fitness: FitnessConfig,
    ) -> Result<Self, OptimizerError> {
        let n = candidates.len();
        if n == 0 {
            return Err(OptimizerError::NoCandidates);
        }
        if times.len() != n {
            return Err(OptimizerError::TimesLength(times.len(), n));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(OptimizerError::BadDeadline(t_max));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in candidates.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(OptimizerError::DuplicateCandidate(id.clone()));
            }
            if !(times[i] >= 0.0 && times[i].is_finite()) {
                return Err(OptimizerError::BadTime {
                    id: id.clone(),
                    hours: times[i],
                });
            }
        }
        matrices.check_shape(n)?;
        fitness.check()?;
        let resolve = |pairs: &[(RequirementId, RequirementId)]| -> Result<Vec<(usize, usize)>, OptimizerError> {
            pairs
                .iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| {
                    let i = *index
                        .get(a)
                        .ok_or_else(|| OptimizerError::UnknownConstraintId(a.clone()))?;
                    let j = *index
                        .get(b)
                        .ok_or_else(|| OptimizerError::UnknownConstraintId(b.clone()))?;
                    Ok((i, j))
                })
                .collect()
        };
        let precedence = resolve(&constraints.precedence)?;
        let coupling = resolve(&constraints.coupling)?;
        Ok(Self {
            candidates,
            times,
            t_max,
            constraints,
            matrices,
            fitness,
            precedence,
            coupling,
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[RequirementId] {
        &self.candidates
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn matrices(&self) -> &RatingMatrices {
        &self.matrices
    }

    pub fn fitness(&self) -> &FitnessConfig {
        &self.fitness
    }

    pub fn with_fitness(mut self, fitness: FitnessConfig) -> Result<Self, OptimizerError> {
        fitness.check()?;
        self.fitness = fitness;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.fitness.delta.unwrap_or(self.matrices.value_scale_max)
    }

    pub fn chromosome(&self, selected: &[&str]) -> Chromosome {
        Chromosome(
            self.candidates
                .iter()
                .map(|id| selected.contains(&id.as_str()))
                .collect(),
        )
    }

    fn check_len(&self, c: &Chromosome) -> Result<(), OptimizerError> {
        if c.len() == self.len() {
            Ok(())
        } else {
            Err(OptimizerError::LengthMismatch {
                expected: self.len(),
                got: c.len(),
            })
        }
    }

    pub fn total_hours(&self, c: &Chromosome) -> f64 {
        c.0.iter().zip(&self.times).filter(|(b, _)| **b).map(|(_, t)| t).sum()
    }

    /// Mask-based feasibility for exhaustive enumeration.
    fn mask_is_valid(&self, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        for &(i, j) in &self.precedence {
            if mask >> j & 1 == 1 && mask >> i & 1 == 0 {
                return false;
            }
        }
        for &(i, j) in &self.coupling {
            if (mask >> i ^ mask >> j) & 1 == 1 {
                return false;
            }
        }
        let mut total = 0.0;
        let mut m = mask;
        while m != 0 {
            total += self.times[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        total <= self.t_max
    }

    fn is_valid(&self, bits: &[bool]) -> bool {
        bits.iter().any(|&b| b)
            && self.precedence.iter().all(|&(i, j)| !bits[j] || bits[i])
            && self.coupling.iter().all(|&(i, j)| bits[i] == bits[j])
            && bits
                .iter()
                .zip(&self.times)
                .filter(|(b, _)| **b)
                .map(|(_, t)| t)
                .sum::<f64>()
                <= self.t_max
    }

    /// Smallest set containing `seed` that is closed under precedence
    /// predecessors and coupling partners.
    fn closure(&self, seed: usize) -> Vec<bool> {
        let mut inside = vec![false; self.len()];
        let mut stack = vec![seed];
        inside[seed] = true;
        while let Some(x) = stack.pop() {
            let preds = self.precedence.iter().filter(|&&(_, j)| j == x).map(|&(i, _)| i);
            let partners = self.coupling.iter().filter_map(|&(i, j)| {
                if i == x {
                    Some(j)
                } else if j == x {
                    Some(i)
                } else {
                    None
                }
            });
            for y in preds.chain(partners).collect::<Vec<_>>() {
                if !inside[y] {
                    inside[y] = true;
                    stack.push(y);
                }
            }
        }
        inside
    }

    /// Hours of the cheapest constraint-closed selection. Every valid selection
    /// contains such a closure, so the problem is feasible iff this fits `t_max`.
    pub fn min_required_hours(&self) -> f64 {
        (0..self.len())
            .map(|s| {
                self.closure(s)
                    .iter()
                    .zip(&self.times)
                    .filter(|(b, _)| **b)
                    .map(|(_, t)| t)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn infeasible(&self) -> OptimizerError {
        let min = self.min_required_hours();
        OptimizerError::Infeasible {
            t_max: self.t_max,
            min_hours: min.is_finite().then_some(min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintViolation {
    EmptySelection,
    Budget {
        total_hours: f64,
        t_max: f64,
    },
    Precedence {
        before: RequirementId,
        after: RequirementId,
    },
    Coupling {
        first: RequirementId,
        second: RequirementId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid(Vec<ConstraintViolation>),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Self::Valid)
    }
}

pub fn check_constraints(c: &Chromosome, p: &PlanProblem) -> Result<Verdict, OptimizerError> {
    p.check_len(c)?;
    let bits = c.bits();
    let mut out = Vec::new();
    if !bits.iter().any(|&b| b) {
        out.push(ConstraintViolation::EmptySelection);
    }
    let total = p.total_hours(c);
    if total > p.t_max {
        out.push(ConstraintViolation::Budget {
            total_hours: total,
            t_max: p.t_max,
        });
    }
    for &(i, j) in &p.precedence {
        if bits[j] && !bits[i] {
            out.push(ConstraintViolation::Precedence {
                before: p.candidates[i].clone(),
                after: p.candidates[j].clone(),
            });
        }
    }
    for &(i, j) in &p.coupling {
        if bits[i] != bits[j] {
            out.push(ConstraintViolation::Coupling {
                first: p.candidates[i].clone(),
                second: p.candidates[j].clone(),
            });
        }
    }
    Ok(if out.is_empty() {
        Verdict::Valid
    } else {
        Verdict::Invalid(out)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaObjective {
    pub alpha: f64,
    pub objective: f64,
}

/// A ranked selection for the current increment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSolution {
    pub selected: Vec<RequirementId>,
    pub omega: BTreeMap<RequirementId, u8>,
    pub total_hours: f64,
    #[serde(rename = "A")]
    pub penalty_a: f64,
    #[serde(rename = "B")]
    pub benefit_b: f64,
    pub objective_by_alpha: Vec<AlphaObjective>,
    /// Best objective over the configured alphas; the ranking key.
    pub fitness: f64,
}

impl PlanSolution {
    pub(crate) fn build(c: &Chromosome, eval: &Evaluation, p: &PlanProblem) -> Self {
        Self {
            selected: p
                .candidates
                .iter()
                .zip(c.bits())
                .filter(|(_, b)| **b)
                .map(|(id, _)| id.clone())
                .collect(),
            omega: p
                .candidates
                .iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), c.omega(i)))
                .collect(),
            total_hours: p.total_hours(c),
            penalty_a: eval.penalty,
            benefit_b: eval.benefit,
            objective_by_alpha: p
                .fitness
                .alphas
                .iter()
                .zip(&eval.objectives)
                .map(|(&alpha, &objective)| AlphaObjective { alpha, objective })
                .collect(),
            fitness: eval.fitness,
        }
    }

    pub fn objective_at(&self, alpha: f64) -> Option<f64> {
        self.objective_by_alpha
            .iter()
            .find(|a| a.alpha == alpha)
            .map(|a| a.objective)
    }

    pub fn selects(&self, id: &str) -> bool {
        self.selected.iter().any(|s| s.as_str() == id)
    }

    pub fn chromosome(&self, p: &PlanProblem) -> Chromosome {
        Chromosome(p.candidates.iter().map(|id| self.selected.contains(id)).collect())
    }
}

/// Ranking order: higher score first, ties broken by the lexicographically
/// smaller bit vector.
pub(crate) fn rank_cmp(a: (f64, &Chromosome), b: (f64, &Chromosome)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Project 1 as printed: Table 5 times, deadline 400, Table 6/7 ratings.
    pub(crate) fn project_one() -> PlanProblem {
        let ids: Vec<RequirementId> = (1..=7).map(|i| RequirementId(format!("R{i}"))).collect();
        let r = |s: &str| RequirementId::from(s);
        PlanProblem::new(
            ids,
            vec![95.0, 189.0, 283.0, 283.0, 283.0, 95.0, 95.0],
            400.0,
            ConstraintSet {
                precedence: vec![
                    (r("R1"), r("R2")),
                    (r("R1"), r("R3")),
                    (r("R1"), r("R6")),
                    (r("R1"), r("R7")),
                ],
                coupling: vec![(r("R3"), r("R4"))],
            },
            RatingMatrices::new(
                vec![
                    vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
                    vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 7.0],
                    vec![1.0, 3.0, 4.0, 5.0, 6.0, 2.0, 7.0],
                    vec![1.0, 4.0, 5.0, 6.0, 2.0, 3.0, 7.0],
                    vec![1.0, 4.0, 5.0, 6.0, 2.0, 3.0, 7.0],
                ],
                vec![
                    vec![4.0, 4.0, 5.0, 5.0, 5.0, 1.0, 2.0],
                    vec![5.0; 7],
                    vec![2.0, 2.0, 5.0, 5.0, 2.0, 3.0, 1.0],
                    vec![1.0, 1.0, 1.0, 5.0, 5.0, 4.0, 4.0],
                    vec![2.0, 1.0, 3.0, 5.0, 4.0, 1.0, 3.0],
                ],
                5.0,
                vec![
                    0.33017015476342265,
                    0.21629475480106616,
                    0.20089961931476658,
                    0.09484092578762986,
                    0.15779454533311474,
                ],
            )
            .unwrap(),
            FitnessConfig::default(),
        )
        .unwrap()
    }

    pub(crate) fn random_problem(n: usize, q: usize, seed: u64, density: f64) -> PlanProblem {
        crate::bench::random_problem(&crate::bench::RandomSpec {
            n,
            stakeholders: q,
            density,
            seed,
        })
    }

    #[test]
    fn project_one_constraint_examples() {
        let p = project_one();
        assert!(check_constraints(&p.chromosome(&["R1", "R6"]), &p).unwrap().is_valid());
        match check_constraints(&p.chromosome(&["R2"]), &p).unwrap() {
            Verdict::Invalid(v) => assert_eq!(
                v,
                vec![ConstraintViolation::Precedence {
                    before: "R1".into(),
                    after: "R2".into()
                }]
            ),
            Verdict::Valid => panic!("R2 alone must violate precedence"),
        }
        match check_constraints(&p.chromosome(&["R1", "R3", "R4"]), &p).unwrap() {
            Verdict::Invalid(v) => assert_eq!(
                v,
                vec![ConstraintViolation::Budget {
                    total_hours: 661.0,
                    t_max: 400.0
                }]
            ),
            Verdict::Valid => panic!("over budget"),
        }
    }

    #[test]
    fn coupling_and_empty_violations() {
        let p = project_one();
        let v = check_constraints(&p.chromosome(&["R1", "R3"]), &p).unwrap();
        assert!(
            matches!(v, Verdict::Invalid(ref x) if x.iter().any(|c| matches!(c, ConstraintViolation::Coupling { .. })))
        );
        let v = check_constraints(&p.chromosome(&[]), &p).unwrap();
        assert_eq!(v, Verdict::Invalid(vec![ConstraintViolation::EmptySelection]));
    }

    #[test]
    fn length_mismatch() {
        let p = project_one();
        assert_eq!(
            check_constraints(&Chromosome::new(vec![true]), &p),
            Err(OptimizerError::LengthMismatch { expected: 7, got: 1 })
        );
    }

    #[test]
    fn mask_and_vector_checks_agree() {
        let p = project_one();
        for mask in 0..128u64 {
            let c = Chromosome::from_mask(mask, 7);
            assert_eq!(p.mask_is_valid(mask), p.is_valid(c.bits()));
            assert_eq!(p.is_valid(c.bits()), check_constraints(&c, &p).unwrap().is_valid());
            assert_eq!(c.mask(), Some(mask));
        }
    }

    #[test]
    fn min_required_hours_project_one() {
        // R1 alone (95) is the cheapest closed selection.
        assert_eq!(project_one().min_required_hours(), 95.0);
    }

    #[test]
    fn problem_construction_errors() {
        let p = project_one();
        let rebuild = |times: Vec<f64>, t_max: f64, cs: ConstraintSet| {
            PlanProblem::new(
                p.candidates.clone(),
                times,
                t_max,
                cs,
                p.matrices.clone(),
                FitnessConfig::default(),
            )
        };
        assert!(matches!(
            rebuild(vec![1.0; 6], 1.0, ConstraintSet::default()),
            Err(OptimizerError::TimesLength(6, 7))
        ));
        assert!(matches!(
            rebuild(vec![1.0; 7], 0.0, ConstraintSet::default()),
            Err(OptimizerError::BadDeadline(_))
        ));
        let cs = ConstraintSet {
            precedence: vec![("R1".into(), "R99".into())],
            coupling: vec![],
        };
        assert!(matches!(
            rebuild(vec![1.0; 7], 1.0, cs),
            Err(OptimizerError::UnknownConstraintId(_))
        ));
    }

    #[test]
    fn fitness_config_checks() {
        let mut f = FitnessConfig::default();
        assert!(f.check().is_ok());
        f.k_best = 11;
        assert!(f.check().is_err());
        f.k_best = 3;
        f.alphas = vec![0.7, 0.3];
        assert!(f.check().is_err());
        f.alphas = vec![1.2];
        assert_eq!(f.check(), Err(OptimizerError::Alpha(1.2)));
    }

    #[test]
    fn solution_json_shape() {
        let p = project_one();
        let c = p.chromosome(&["R1", "R6"]);
        let sol = PlanSolution::build(&c, &evaluate(&c, &p).unwrap(), &p);
        let v = serde_json::to_value(&sol).unwrap();
        for key in [
            "selected",
            "omega",
            "total_hours",
            "A",
            "B",
            "objective_by_alpha",
            "fitness",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["selected"], serde_json::json!(["R1", "R6"]));
        assert_eq!(v["omega"]["R6"], 1);
        assert_eq!(v["omega"]["R2"], 2);
        assert_eq!(v["total_hours"], 190.0);
    }
}
