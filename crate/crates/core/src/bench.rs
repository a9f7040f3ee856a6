//! Seeded random instances and the enumeration scaling benchmark.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ConstraintSet, RatingMatrices, RequirementId};
use crate::optimizer::{count_feasible, BenefitForm, FitnessConfig, OptimizerError, PlanProblem, MAX_EXHAUSTIVE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub stakeholders: usize,
    /// Constraint density in `[0, 1]`: each ordered pair `i < j` becomes a
    /// precedence with probability `density / n` and otherwise a coupling with
    /// probability `density / 2n`.
    pub density: f64,
    pub seed: u64,
}

/// Random instance with times in `[10, 100)`, a budget of 20-70% of the total,
/// acyclic precedence, priorities in `1..=n` and values in `0..=5`. Even seeds
/// use the literal benefit form, odd seeds the classic one.
pub fn random_problem(spec: &RandomSpec) -> PlanProblem {
    let RandomSpec {
        n,
        stakeholders: q,
        density,
        seed,
    } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<RequirementId> = (0..n).map(|i| RequirementId(format!("r{i}"))).collect();
    let times: Vec<f64> = (0..n).map(|_| rng.random_range(10.0..100.0)).collect();
    let t_max = times.iter().sum::<f64>() * rng.random_range(0.2..0.7);
    let mut cs = ConstraintSet::default();
    let p_prec = (density / n as f64).clamp(0.0, 1.0);
    let p_coup = (density / (2 * n) as f64).clamp(0.0, 1.0);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_prec) {
                cs.precedence.push((ids[i].clone(), ids[j].clone()));
            } else if rng.random_bool(p_coup) {
                cs.coupling.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    let raw: Vec<f64> = (0..q).map(|_| rng.random_range(0.1..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut lambda: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    // absorb rounding so the weights sum to one
    let rest: f64 = lambda[1..].iter().sum();
    lambda[0] = 1.0 - rest;
    let prio = (0..q)
        .map(|_| (0..n).map(|_| f64::from(rng.random_range(1..=n as u32))).collect())
        .collect();
    let value = (0..q)
        .map(|_| (0..n).map(|_| f64::from(rng.random_range(0..=5u32))).collect())
        .collect();
    let matrices = RatingMatrices::new(prio, value, 5.0, lambda).expect("generated matrices are well formed");
    let fitness = FitnessConfig {
        benefit_form: if seed % 2 == 0 {
            BenefitForm::Literal
        } else {
            BenefitForm::Classic
        },
        ..FitnessConfig::default()
    };
    PlanProblem::new(ids, times, t_max, cs, matrices, fitness).expect("generated problem is well formed")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("bench range {n_min}..={n_max} must be non-empty and within 1..={MAX_EXHAUSTIVE}")]
    Range { n_min: usize, n_max: usize },
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub subsets: u64,
    pub feasible: u64,
    /// Fastest observed enumeration + filter pass, in milliseconds.
    pub millis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    /// Minimum measuring time per row; the row reports the fastest pass.
    pub budget: Duration,
    pub min_passes: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_min: 10,
            n_max: 22,
            seed: 0,
            budget: Duration::from_millis(100),
            min_passes: 3,
        }
    }
}

/// Times exhaustive enumeration plus constraint filtering for every `n` in
/// range. Each `n` uses the first `n` candidates of one shared instance, so
/// larger rows do strictly more work.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max || cfg.n_max > MAX_EXHAUSTIVE {
        return Err(BenchError::Range {
            n_min: cfg.n_min,
            n_max: cfg.n_max,
        });
    }
    let master = random_problem(&RandomSpec {
        n: cfg.n_max,
        stakeholders: 3,
        density: 0.3,
        seed: cfg.seed,
    });
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let p = prefix(&master, n)?;
        let mut best = Duration::MAX;
        let mut passes = 0;
        let started = Instant::now();
        let mut counts = (0, 0);
        while passes < cfg.min_passes || started.elapsed() < cfg.budget {
            let t = Instant::now();
            counts = std::hint::black_box(count_feasible(&p)?);
            best = best.min(t.elapsed());
            passes += 1;
        }
        rows.push(BenchRow {
            n,
            subsets: counts.0,
            feasible: counts.1,
            millis: best.as_secs_f64() * 1e3,
        });
    }
    Ok(rows)
}

fn prefix(p: &PlanProblem, n: usize) -> Result<PlanProblem, OptimizerError> {
    let ids = &p.candidates()[..n];
    let keep = ids.iter().collect();
    let cols: Vec<usize> = (0..n).collect();
    let times = p.times()[..n].to_vec();
    // keep the budget proportional to the retained work
    let t_max = p.t_max() * times.iter().sum::<f64>() / p.times().iter().sum::<f64>();
    PlanProblem::new(
        ids.to_vec(),
        times,
        t_max,
        p.constraints().restrict_to(&keep),
        p.matrices().select_columns(&cols),
        p.fitness().clone(),
    )
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,subsets,feasible,millis\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:.6}\n", r.n, r.subsets, r.feasible, r.millis));
    }
    out
}
