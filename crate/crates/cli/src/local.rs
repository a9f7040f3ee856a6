use std::path::Path;

use relplan_core::bench::{run_bench, to_csv, BenchConfig};
use relplan_core::feedback::{compute_dt, compute_fr, feedback_factor, FeedbackConfig, ReleaseOutcome};
use relplan_core::model::ProjectState;
use relplan_core::planner::{estimate_project, fill_estimates, plan_iteration, FitnessOverrides, GaOverrides};
use relplan_core::protocol::{PlanBody, PlanResponse};

use crate::fail::Failure;
use crate::{render, PlanArgs, PlanFormat};

pub fn load(path: &Path) -> Result<ProjectState, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    ProjectState::from_json(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn save(path: &Path, state: &ProjectState) -> Result<(), Failure> {
    let mut text = state.to_json_pretty();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn estimate(path: &Path, write: bool) -> Result<(), Failure> {
    let state = load(path)?;
    let report = estimate_project(&state)?;
    print!("{}", render::estimate(&state, &report));
    if write {
        save(path, &fill_estimates(&state)?)?;
    }
    Ok(())
}

impl PlanArgs {
    pub fn body(&self) -> PlanBody {
        PlanBody {
            fitness: FitnessOverrides {
                alphas: (!self.alphas.is_empty()).then(|| self.alphas.clone()),
                k_best: self.k_best,
                ..FitnessOverrides::default()
            },
            ga: GaOverrides {
                rng_seed: self.seed,
                ..GaOverrides::default()
            },
            ..PlanBody::new(self.t_max)
        }
    }
}

pub fn print_plan(resp: &PlanResponse, format: PlanFormat) {
    match format {
        PlanFormat::Table => print!("{}", render::plan_table(resp)),
        PlanFormat::Json => println!("{}", serde_json::to_string_pretty(resp).expect("plan serialises")),
    }
}

/// Plans the open iteration of the file without modifying it.
pub fn plan(path: &Path, args: &PlanArgs) -> Result<(), Failure> {
    let state = load(path)?;
    let k = state.current_index().unwrap_or(1);
    let mut body = args.body();
    body.replan = true;
    let next = plan_iteration(&state, &body.into_request(k))?;
    print_plan(&PlanResponse::of(&next.iterations[k as usize - 1]), args.out);
    Ok(())
}

pub fn feedback(actual: f64, estimated: f64, failed: u32, implemented: u32, up: f64) -> Result<(), Failure> {
    let outcome = ReleaseOutcome {
        actual_hours: actual,
        estimated_hours: estimated,
        failed_count: failed,
        implemented_count: implemented,
        user_perception: up,
    };
    outcome.check().map_err(Failure::validation)?;
    let dt = compute_dt(actual, estimated).map_err(Failure::validation)?;
    let fr = compute_fr(failed, implemented).map_err(Failure::validation)?;
    let ff = feedback_factor(dt, fr, up, &FeedbackConfig::default());
    println!("dT {}", render::num(dt));
    println!("FR {}", render::num(fr));
    println!("FF {}", render::num(ff));
    Ok(())
}

pub fn bench(n_min: usize, n_max: usize) -> Result<(), Failure> {
    let rows = run_bench(&BenchConfig {
        n_min,
        n_max,
        ..BenchConfig::default()
    })
    .map_err(Failure::validation)?;
    print!("{}", to_csv(&rows));
    Ok(())
}
