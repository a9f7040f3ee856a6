//! HTTP/JSON service over the release planner.
//!
//! Projects are stored as JSON documents under a data directory. Reads are
//! lock-free; every write holds the project's writer lock and a competing
//! write is answered with `409 conflict`.

pub mod error;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use relplan_core::model::{validate_project, ProjectState};
use relplan_core::planner::{
    choose_solution, plan_iteration, project_timeline, record_outcome, OutcomeInput, Timeline,
};
use relplan_core::protocol::{
    ChooseBody, ChooseResponse, OutcomeResponse, PlanBody, PlanResponse, ProjectEnvelope, ProjectSummary, API_PREFIX,
};
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use relplan_core::protocol::{ErrorBody, ErrorCode};
pub use store::Store;

pub const DATA_DIR_ENV: &str = "RELPLAN_DATA_DIR";
pub const ADDR_ENV: &str = "RELPLAN_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "relplan-data";

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    /// Directory of built UI assets served for every non-API path.
    pub static_dir: Option<PathBuf>,
}

impl ServerConfig {
    /// Reads the bind address and data directory from the environment.
    pub fn from_env() -> Result<Self, String> {
        let addr = std::env::var(ADDR_ENV).unwrap_or_else(|_| DEFAULT_ADDR.to_string());
        Ok(Self {
            addr: addr.parse().map_err(|e| format!("{ADDR_ENV}={addr}: {e}"))?,
            data_dir: std::env::var_os(DATA_DIR_ENV).map_or_else(|| DEFAULT_DATA_DIR.into(), PathBuf::from),
            static_dir: None,
        })
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::validation(format!("malformed request body: {e}")).with_details(serde_json::json!({
            "line": e.line(),
            "column": e.column(),
        }))
    })
}

fn validated(project: ProjectState) -> ApiResult<(ProjectState, Vec<relplan_core::model::Violation>)> {
    let report = validate_project(&project);
    if report.is_valid() {
        Ok((project, report.warnings))
    } else {
        Err(ApiError::validation(format!("project is invalid: {report}"))
            .with_details(serde_json::to_value(&report).unwrap_or_default()))
    }
}

/// Runs a planner operation off the async runtime.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

async fn create_project(State(store): State<Store>, body: Bytes) -> ApiResult<(StatusCode, Json<ProjectEnvelope>)> {
    let (project, warnings) = validated(parse(&body)?)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let guard = store.lock(&id)?;
    store.put(&id, &guard, &project).await?;
    tracing::info!(%id, "project created");
    Ok((StatusCode::CREATED, Json(ProjectEnvelope { id, project, warnings })))
}

async fn list_projects(State(store): State<Store>) -> ApiResult<Json<Vec<ProjectSummary>>> {
    let mut out = Vec::new();
    for id in store.list().await? {
        // a document removed between listing and reading is skipped
        if let Ok(p) = store.get(&id).await {
            out.push(ProjectSummary::of(&id, &p));
        }
    }
    Ok(Json(out))
}

async fn get_project(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<ProjectEnvelope>> {
    let project = store.get(&id).await?;
    let warnings = validate_project(&project).warnings;
    Ok(Json(ProjectEnvelope { id, project, warnings }))
}

async fn put_project(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ProjectEnvelope>> {
    if !store.exists(&id).await {
        return Err(ApiError::not_found(format!("no project {id}")));
    }
    let (project, warnings) = validated(parse(&body)?)?;
    let guard = store.lock(&id)?;
    store.put(&id, &guard, &project).await?;
    Ok(Json(ProjectEnvelope { id, project, warnings }))
}

async fn plan(
    State(store): State<Store>,
    Path((id, k)): Path<(String, u32)>,
    body: Bytes,
) -> ApiResult<Json<PlanResponse>> {
    let req = parse::<PlanBody>(&body)?.into_request(k);
    let guard = store.lock(&id)?;
    let state = store.get(&id).await?;
    let next = blocking(move || plan_iteration(&state, &req)).await??;
    store.put(&id, &guard, &next).await?;
    Ok(Json(PlanResponse::of(&next.iterations[k as usize - 1])))
}

async fn choose(
    State(store): State<Store>,
    Path((id, k)): Path<(String, u32)>,
    body: Bytes,
) -> ApiResult<Json<ChooseResponse>> {
    let ChooseBody { index } = parse(&body)?;
    let guard = store.lock(&id)?;
    let state = store.get(&id).await?;
    let next = choose_solution(&state, k, index)?;
    store.put(&id, &guard, &next).await?;
    let it = &next.iterations[k as usize - 1];
    Ok(Json(ChooseResponse {
        iteration: k,
        index,
        selected: it.chosen_solution().map(|s| s.selected.clone()).unwrap_or_default(),
        cycle_hours: it.cycle_hours.unwrap_or_default(),
    }))
}

async fn outcome(
    State(store): State<Store>,
    Path((id, k)): Path<(String, u32)>,
    body: Bytes,
) -> ApiResult<Json<OutcomeResponse>> {
    let input: OutcomeInput = parse(&body)?;
    let guard = store.lock(&id)?;
    let state = store.get(&id).await?;
    let next = record_outcome(&state, k, &input)?;
    store.put(&id, &guard, &next).await?;
    let ff = next.iterations[k as usize - 1].outcome.as_ref().map_or(1.0, |o| o.ff);
    let opened = next.iterations.get(k as usize).cloned();
    Ok(Json(OutcomeResponse {
        iteration: k,
        ff,
        complete: opened.is_none(),
        next: opened,
    }))
}

async fn timeline(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<Timeline>> {
    Ok(Json(project_timeline(&store.get(&id).await?)))
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(store: Store, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project).put(put_project))
        .route("/projects/{id}/iterations/{k}/plan", post(plan))
        .route("/projects/{id}/iterations/{k}/choose", post(choose))
        .route("/projects/{id}/iterations/{k}/outcome", post(outcome))
        .route("/projects/{id}/timeline", get(timeline))
        .fallback(api_not_found)
        .with_state(store);
    let app = Router::new().nest(API_PREFIX, api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    store: Store,
    static_dir: Option<PathBuf>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Binds `cfg.addr` and serves until Ctrl-C.
pub async fn run(cfg: ServerConfig) -> std::io::Result<()> {
    let store = Store::open(&cfg.data_dir).await?;
    let listener = TcpListener::bind(cfg.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, data_dir = %cfg.data_dir.display(), "listening");
    serve_on(listener, store, cfg.static_dir, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
