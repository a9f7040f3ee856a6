use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use relplan_core::planner::PlanError;
use relplan_core::protocol::{ErrorBody, ErrorCode};
use serde_json::Value;

pub fn status_of(code: ErrorCode) -> StatusCode {
    match code {
        ErrorCode::ValidationFailed | ErrorCode::Infeasible => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorCode::NotFound => StatusCode::NOT_FOUND,
        ErrorCode::Conflict => StatusCode::CONFLICT,
        ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}: {}", .0.code.as_str(), .0.message)]
pub struct ApiError(pub ErrorBody);

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self(ErrorBody {
            code,
            message: message.into(),
            details: None,
        })
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.0.details = Some(details);
        self
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::ValidationFailed, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        let message = e.to_string();
        match e {
            PlanError::Validation(report) => {
                Self::validation(message).with_details(serde_json::to_value(report).unwrap_or(Value::Null))
            }
            PlanError::NotFound(_) => Self::not_found(message),
            PlanError::Conflict(_) => Self::conflict(message),
            PlanError::Infeasible { t_max, min_hours } => Self::new(ErrorCode::Infeasible, message)
                .with_details(serde_json::json!({ "t_max": t_max, "min_required_hours": min_hours })),
            PlanError::Unestimated(ids) => {
                Self::validation(message).with_details(serde_json::json!({ "requirements": ids }))
            }
            _ => Self::validation(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_of(self.0.code), Json(self.0)).into_response()
    }
}
