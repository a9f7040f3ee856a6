use super::{BenefitForm, Chromosome, OptimizerError, PlanProblem};

/// Penalty and benefit of one chromosome plus its objective at every alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub penalty: f64,
    pub benefit: f64,
    pub objectives: Vec<f64>,
    pub fitness: f64,
}

fn pair_penalty(dp: f64, dw: f64) -> f64 {
    if dp * dw > 0.0 || (dp == 0.0 && dw == 0.0) {
        0.0
    } else if dw == 0.0 {
        dp.abs()
    } else if dp == 0.0 {
        dw.abs()
    } else {
        dp.abs() * dw.abs()
    }
}

pub(crate) fn penalty_of(bits: &[bool], p: &PlanProblem) -> f64 {
    let omega: Vec<f64> = bits.iter().map(|&b| if b { 1.0 } else { 2.0 }).collect();
    let m = p.matrices();
    m.lambda
        .iter()
        .zip(&m.prio)
        .map(|(lambda, prio)| {
            let mut sum = 0.0;
            for i in 0..bits.len() {
                for j in i + 1..bits.len() {
                    sum += pair_penalty(prio[i] - prio[j], omega[i] - omega[j]);
                }
            }
            lambda * sum
        })
        .sum()
}

pub(crate) fn benefit_of(bits: &[bool], p: &PlanProblem) -> f64 {
    // tau is the largest increment used: 2 unless every candidate is selected.
    let tau = if bits.iter().all(|&b| b) { 1.0 } else { 2.0 };
    let delta = p.delta();
    let form = p.fitness().benefit_form;
    let m = p.matrices();
    m.lambda
        .iter()
        .zip(&m.value)
        .map(|(lambda, values)| {
            let sum: f64 = values
                .iter()
                .zip(bits)
                .map(|(&v, &b)| {
                    let omega = if b { 1.0 } else { 2.0 };
                    let worth = match form {
                        BenefitForm::Literal => delta - v + 1.0,
                        BenefitForm::Classic => v,
                    };
                    worth * (tau - omega + 1.0)
                })
                .sum();
            lambda * sum
        })
        .sum()
}

/// Aggregated penalty `A`: stakeholder-weighted disagreement between priority
/// order and increment order over every unordered candidate pair.
pub fn compute_penalty(c: &Chromosome, p: &PlanProblem) -> Result<f64, OptimizerError> {
    p.check_len(c)?;
    Ok(penalty_of(c.bits(), p))
}

/// Aggregated benefit `B` under the problem's configured benefit form.
pub fn compute_benefit(c: &Chromosome, p: &PlanProblem) -> Result<f64, OptimizerError> {
    p.check_len(c)?;
    Ok(benefit_of(c.bits(), p))
}

pub fn compute_objective(a: f64, b: f64, alpha: f64) -> Result<f64, OptimizerError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(OptimizerError::Alpha(alpha));
    }
    Ok((alpha - 1.0) * a + alpha * b)
}

pub(crate) fn evaluate_bits(bits: &[bool], p: &PlanProblem) -> Evaluation {
    let penalty = penalty_of(bits, p);
    let benefit = benefit_of(bits, p);
    let objectives: Vec<f64> = p
        .fitness()
        .alphas
        .iter()
        .map(|&alpha| (alpha - 1.0) * penalty + alpha * benefit)
        .collect();
    let fitness = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Evaluation {
        penalty,
        benefit,
        objectives,
        fitness,
    }
}

pub fn evaluate(c: &Chromosome, p: &PlanProblem) -> Result<Evaluation, OptimizerError> {
    p.check_len(c)?;
    Ok(evaluate_bits(c.bits(), p))
}
