//! Async client for the relplan HTTP service.

use relplan_core::model::ProjectState;
use relplan_core::planner::{OutcomeInput, Timeline};
use relplan_core::protocol::{
    ChooseBody, ChooseResponse, ErrorBody, ErrorCode, OutcomeResponse, PlanBody, PlanResponse, ProjectEnvelope,
    ProjectSummary, API_PREFIX,
};
use reqwest::{Method, RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("{status}: {}: {}", .body.code.as_str(), .body.message)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("unexpected response ({status}): {message}")]
    Decode { status: StatusCode, message: String },
}

impl ClientError {
    /// The service error code, if the server answered with one.
    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            Self::Api { body, .. } => Some(body.code),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str) -> Self {
        Self::with_http(base_url, reqwest::Client::new())
    }

    pub fn with_http(base_url: &str, http: reqwest::Client) -> Self {
        Self {
            base: format!("{}{API_PREFIX}", base_url.trim_end_matches('/')),
            http,
        }
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        let resp = req.send().await?;
        let status = resp.status();
        let bytes = resp.bytes().await?;
        if status.is_success() {
            return serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode {
                status,
                message: e.to_string(),
            });
        }
        match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(body) => Err(ClientError::Api { status, body }),
            Err(_) => Err(ClientError::Decode {
                status,
                message: String::from_utf8_lossy(&bytes).into_owned(),
            }),
        }
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.send(self.request(Method::POST, path).json(body)).await
    }

    pub async fn list_projects(&self) -> Result<Vec<ProjectSummary>> {
        self.send(self.request(Method::GET, "/projects")).await
    }

    pub async fn create_project(&self, project: &ProjectState) -> Result<ProjectEnvelope> {
        self.post("/projects", project).await
    }

    pub async fn get_project(&self, id: &str) -> Result<ProjectEnvelope> {
        self.send(self.request(Method::GET, &format!("/projects/{id}"))).await
    }

    pub async fn put_project(&self, id: &str, project: &ProjectState) -> Result<ProjectEnvelope> {
        self.send(self.request(Method::PUT, &format!("/projects/{id}")).json(project))
            .await
    }

    pub async fn plan(&self, id: &str, k: u32, body: &PlanBody) -> Result<PlanResponse> {
        self.post(&format!("/projects/{id}/iterations/{k}/plan"), body).await
    }

    pub async fn choose(&self, id: &str, k: u32, index: usize) -> Result<ChooseResponse> {
        self.post(&format!("/projects/{id}/iterations/{k}/choose"), &ChooseBody { index })
            .await
    }

    pub async fn outcome(&self, id: &str, k: u32, input: &OutcomeInput) -> Result<OutcomeResponse> {
        self.post(&format!("/projects/{id}/iterations/{k}/outcome"), input)
            .await
    }

    pub async fn timeline(&self, id: &str) -> Result<Timeline> {
        self.send(self.request(Method::GET, &format!("/projects/{id}/timeline")))
            .await
    }
}
