use super::fitness::evaluate_bits;
use super::{rank_cmp, Chromosome, Evaluation, OptimizerError, PlanProblem, PlanSolution, MAX_EXHAUSTIVE};

/// All `2^n - 1` non-empty selections in ascending binary order, bit `i`
/// standing for candidate `i`.
pub fn enumerate_subsets(n: usize) -> Result<impl Iterator<Item = Chromosome>, OptimizerError> {
    check_size(n)?;
    Ok((1..1u64 << n).map(move |mask| Chromosome::from_mask(mask, n)))
}

fn check_size(n: usize) -> Result<(), OptimizerError> {
    if (1..=MAX_EXHAUSTIVE).contains(&n) {
        Ok(())
    } else {
        Err(OptimizerError::TooManyCandidates(n))
    }
}

/// Every valid selection, in enumeration order.
pub fn feasible_universe(p: &PlanProblem) -> Result<Vec<Chromosome>, OptimizerError> {
    check_size(p.len())?;
    Ok((1..1u64 << p.len())
        .filter(|&m| p.mask_is_valid(m))
        .map(|m| Chromosome::from_mask(m, p.len()))
        .collect())
}

/// `(subsets enumerated, subsets passing the constraint filter)`.
pub fn count_feasible(p: &PlanProblem) -> Result<(u64, u64), OptimizerError> {
    check_size(p.len())?;
    let total = (1u64 << p.len()) - 1;
    let feasible = (1..=total).filter(|&m| p.mask_is_valid(m)).count() as u64;
    Ok((total, feasible))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRanking {
    pub alpha: f64,
    pub solutions: Vec<PlanSolution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Ranked by the best objective over all alphas.
    pub overall: Vec<PlanSolution>,
    /// One ranking per configured alpha.
    pub per_alpha: Vec<AlphaRanking>,
    pub feasible: u64,
}

/// Bounded best-first list keyed by a score with lexicographic tie-break.
struct TopK {
    k: usize,
    items: Vec<(f64, Chromosome, Evaluation)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, score: f64, c: &Chromosome, eval: &Evaluation) {
        let pos = self
            .items
            .partition_point(|(s, x, _)| rank_cmp((*s, x), (score, c)) == std::cmp::Ordering::Less);
        if pos < self.k {
            self.items.insert(pos, (score, c.clone(), eval.clone()));
            self.items.truncate(self.k);
        }
    }

    fn admits(&self, score: f64) -> bool {
        self.items.len() < self.k || self.items.last().is_some_and(|(s, _, _)| score >= *s)
    }

    fn into_solutions(self, p: &PlanProblem) -> Vec<PlanSolution> {
        self.items
            .into_iter()
            .map(|(_, c, e)| PlanSolution::build(&c, &e, p))
            .collect()
    }
}

pub fn brute_force_ranking(p: &PlanProblem) -> Result<Ranking, OptimizerError> {
    check_size(p.len())?;
    let n = p.len();
    let k = p.fitness().k_best;
    let mut overall = TopK::new(k);
    let mut per_alpha: Vec<TopK> = p.fitness().alphas.iter().map(|_| TopK::new(k)).collect();
    let mut feasible = 0u64;
    for mask in 1..1u64 << n {
        if !p.mask_is_valid(mask) {
            continue;
        }
        feasible += 1;
        let c = Chromosome::from_mask(mask, n);
        let eval = evaluate_bits(c.bits(), p);
        if overall.admits(eval.fitness) {
            overall.offer(eval.fitness, &c, &eval);
        }
        for (top, &score) in per_alpha.iter_mut().zip(&eval.objectives) {
            if top.admits(score) {
                top.offer(score, &c, &eval);
            }
        }
    }
    if feasible == 0 {
        return Err(p.infeasible());
    }
    Ok(Ranking {
        overall: overall.into_solutions(p),
        per_alpha: p
            .fitness()
            .alphas
            .iter()
            .zip(per_alpha)
            .map(|(&alpha, top)| AlphaRanking {
                alpha,
                solutions: top.into_solutions(p),
            })
            .collect(),
        feasible,
    })
}

/// Exhaustive oracle: the `k_best` valid selections by best-over-alpha objective.
pub fn brute_force_plan(p: &PlanProblem) -> Result<Vec<PlanSolution>, OptimizerError> {
    brute_force_ranking(p).map(|r| r.overall)
}
