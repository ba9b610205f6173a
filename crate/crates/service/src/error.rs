use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use relint_core::data::DataError;
use relint_core::AnalysisError;
use serde_json::json;

/// Failure of one request, mapped onto an HTTP status.
#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("no session with id {0}")]
    NotFound(String),
    #[error("no equivalent model satisfies these constraints: {0}")]
    Infeasible(String),
    #[error("optimization failed: {0}")]
    Unprocessable(String),
    #[error("request body exceeds {0} bytes")]
    TooLarge(usize),
    #[error("unsupported content type {0:?}; send text/csv or application/json")]
    UnsupportedMedia(String),
    #[error("recomputation exceeded the {0} s budget")]
    Busy(u64),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::Infeasible(_) => StatusCode::CONFLICT,
            Self::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::TooLarge(_) => StatusCode::PAYLOAD_TOO_LARGE,
            Self::UnsupportedMedia(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            Self::Busy(_) => StatusCode::SERVICE_UNAVAILABLE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Infeasible(m) => Self::Infeasible(m),
            AnalysisError::Data(_) | AnalysisError::InvalidParameter(_) | AnalysisError::Dimension(_) => {
                Self::BadRequest(e.to_string())
            }
            other => Self::Unprocessable(other.to_string()),
        }
    }
}

impl From<DataError> for ApiError {
    fn from(e: DataError) -> Self {
        Self::BadRequest(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.to_string() });
        if matches!(self, Self::Infeasible(_)) {
            body["infeasible"] = true.into();
        }
        (self.status(), Json(body)).into_response()
    }
}
