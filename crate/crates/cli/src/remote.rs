use std::path::PathBuf;

use relplan_client::{Client, ClientError};
use relplan_core::model::RequirementId;
use relplan_core::planner::OutcomeInput;
use relplan_core::protocol::ErrorCode;
use serde::Serialize;

use crate::fail::{Failure, INFEASIBLE, IO, VALIDATION};
use crate::local::{load, print_plan};
use crate::PlanArgs;

pub const URL_ENV: &str = "RELPLAN_URL";

#[derive(Debug, clap::Args)]
pub struct RemoteArgs {
    /// Service root.
    #[arg(long, env = URL_ENV, default_value = "http://127.0.0.1:8080")]
    url: String,
    #[command(subcommand)]
    command: RemoteCommand,
}

#[derive(Debug, clap::Subcommand)]
enum RemoteCommand {
    /// List stored projects.
    List,
    /// Upload a project file as a new project.
    Create { file: PathBuf },
    /// Print a stored project.
    Show { id: String },
    /// Replace a stored project with a file.
    Put { id: String, file: PathBuf },
    /// Plan iteration `k`.
    Plan {
        id: String,
        k: u32,
        #[command(flatten)]
        args: PlanArgs,
        /// Discard an unchosen plan of the same iteration.
        #[arg(long)]
        replan: bool,
    },
    /// Pick solution `index` (0-based) of iteration `k`.
    Choose { id: String, k: u32, index: usize },
    /// Record how iteration `k` went and open the next one.
    Outcome {
        id: String,
        k: u32,
        #[arg(long)]
        actual: f64,
        /// User perception in [0, 1].
        #[arg(long)]
        up: f64,
        /// Defaults to the chosen solution's hours.
        #[arg(long)]
        estimated: Option<f64>,
        /// Requirement that failed; repeat for several.
        #[arg(long = "failed")]
        failed: Vec<String>,
    },
    /// Print the iteration timeline.
    Timeline { id: String },
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let code = match e.code() {
            Some(ErrorCode::Infeasible) => INFEASIBLE,
            Some(ErrorCode::Internal) | None => IO,
            Some(_) => VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("response serialises"));
}

pub fn run(args: RemoteArgs) -> Result<(), Failure> {
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(Failure::io)?;
    rt.block_on(dispatch(Client::new(&args.url), args.command))
}

async fn dispatch(c: Client, command: RemoteCommand) -> Result<(), Failure> {
    match command {
        RemoteCommand::List => print_json(&c.list_projects().await?),
        RemoteCommand::Create { file } => print_json(&c.create_project(&load(&file)?).await?),
        RemoteCommand::Show { id } => print_json(&c.get_project(&id).await?),
        RemoteCommand::Put { id, file } => print_json(&c.put_project(&id, &load(&file)?).await?),
        RemoteCommand::Plan { id, k, args, replan } => {
            let mut body = args.body();
            body.replan = replan;
            print_plan(&c.plan(&id, k, &body).await?, args.out);
        }
        RemoteCommand::Choose { id, k, index } => print_json(&c.choose(&id, k, index).await?),
        RemoteCommand::Outcome {
            id,
            k,
            actual,
            up,
            estimated,
            failed,
        } => {
            let input = OutcomeInput {
                actual_hours: actual,
                user_perception: up,
                estimated_hours: estimated,
                failed: failed.into_iter().map(RequirementId).collect(),
                defects: Vec::new(),
            };
            print_json(&c.outcome(&id, k, &input).await?);
        }
        RemoteCommand::Timeline { id } => print_json(&c.timeline(&id).await?),
    }
    Ok(())
}
