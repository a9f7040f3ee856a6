use std::fmt::Write;

use relplan_core::model::ProjectState;
use relplan_core::planner::EstimateReport;
use relplan_core::protocol::PlanResponse;

/// Up to four decimals with trailing zeros dropped.
pub fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn estimate(state: &ProjectState, r: &EstimateReport) -> String {
    let b = &r.breakdown;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "TCF   {}  (technical total {})",
        num(b.tcf),
        num(b.technical_total)
    );
    let _ = writeln!(
        out,
        "ECF   {}  (environmental total {})",
        num(b.ecf),
        num(b.environmental_total)
    );
    let _ = writeln!(
        out,
        "UUCP  {}  (UUCW {} + UAW {})",
        num(b.uucp),
        num(b.uucw),
        num(b.uaw)
    );
    let _ = writeln!(out, "UCP   {}  (PF {})", num(b.ucp), num(b.pf));
    let _ = writeln!(out, "hours per weight unit {}", num(r.hours_per_weight));
    if let Some(est) = &state.estimation {
        let _ = writeln!(out, "\ncluster  weight  hours");
        for c in &est.clusters {
            let _ = writeln!(
                out,
                "{:<8} {:>6}  {}",
                c.label.as_str(),
                num(c.weight),
                num(c.weight * r.hours_per_weight)
            );
        }
    }
    let _ = writeln!(out, "\nrequirement  cluster  hours");
    for req in &state.requirements {
        let _ = writeln!(
            out,
            "{:<12} {:<8} {}",
            req.id.as_str(),
            req.cluster.as_str(),
            num(r.hours[&req.id])
        );
    }
    out
}

pub fn plan_table(p: &PlanResponse) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "iteration {}  t_max {}  candidates {}",
        p.iteration,
        num(p.t_max),
        p.candidates.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
    );
    let alphas: Vec<f64> = p
        .solutions
        .first()
        .map(|s| s.objective_by_alpha.iter().map(|o| o.alpha).collect())
        .unwrap_or_default();
    let mut header = format!(
        "{:>4}  {:<24} {:>10} {:>10} {:>10}",
        "rank", "selected", "hours", "A", "B"
    );
    for a in &alphas {
        header.push_str(&format!(" {:>10}", format!("C({})", num(*a))));
    }
    header.push_str(&format!(" {:>10}", "fitness"));
    let _ = writeln!(out, "{header}");
    for (i, s) in p.solutions.iter().enumerate() {
        let selected = s.selected.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",");
        let mut line = format!(
            "{:>4}  {:<24} {:>10} {:>10} {:>10}",
            i + 1,
            selected,
            num(s.total_hours),
            num(s.penalty_a),
            num(s.benefit_b)
        );
        for o in &s.objective_by_alpha {
            line.push_str(&format!(" {:>10}", num(o.objective)));
        }
        line.push_str(&format!(" {:>10}", num(s.fitness)));
        let _ = writeln!(out, "{line}");
    }
    out
}
