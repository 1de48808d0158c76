use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{Mode, Status};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("n must be in 1..={max}, got {n}")]
    InvalidN { n: u64, max: u64 },
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    InvalidQuestion(String),
    #[error("{0}")]
    OutOfRange(String),
    #[error("{0}")]
    InvalidResponder(String),
    #[error("operation needs a {expected:?} session")]
    WrongMode { expected: Mode },
    #[error("no session {0}")]
    UnknownSession(String),
    #[error("session is busy with another request")]
    Busy,
    #[error("session is no longer in progress ({0:?})")]
    NotInProgress(Status),
    #[error("session store is full ({0} sessions)")]
    Capacity(usize),
    #[error("event log: {0}")]
    Log(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Error body: `{"code": "...", "message": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidN { .. } => "invalid_n",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::InvalidQuestion(_) => "invalid_question",
            ServiceError::OutOfRange(_) => "out_of_range",
            ServiceError::InvalidResponder(_) => "invalid_responder",
            ServiceError::WrongMode { .. } => "wrong_mode",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::Busy => "conflict",
            ServiceError::NotInProgress(_) => "not_in_progress",
            ServiceError::Capacity(_) => "capacity",
            ServiceError::Log(_) => "event_log",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn status_code(&self) -> StatusCode {
        match self {
            ServiceError::InvalidN { .. }
            | ServiceError::BadRequest(_)
            | ServiceError::InvalidQuestion(_)
            | ServiceError::OutOfRange(_)
            | ServiceError::InvalidResponder(_) => StatusCode::BAD_REQUEST,
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::WrongMode { .. }
            | ServiceError::Busy
            | ServiceError::NotInProgress(_) => StatusCode::CONFLICT,
            ServiceError::Capacity(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Log(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status_code(), Json(self.body())).into_response()
    }
}
