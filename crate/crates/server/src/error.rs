use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use yieldgame_core::validate::FieldError;
use yieldgame_core::GameError;

use crate::api::ErrorBody;

/// Every failure a handler can return, with its status code.
#[derive(Debug)]
pub enum ApiError {
    MissingToken,
    MalformedToken(String),
    UnknownPlayer,
    Forbidden,
    Validation(Vec<FieldError>),
    BadRequest(String),
    RunRejected { balance: i64 },
    RunsNotOpen(u32),
    Duplicate(String),
    Storage(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::MissingToken | ApiError::UnknownPlayer => StatusCode::UNAUTHORIZED,
            ApiError::MalformedToken(_) | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Forbidden | ApiError::RunRejected { .. } => StatusCode::FORBIDDEN,
            ApiError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::RunsNotOpen(_) | ApiError::Duplicate(_) => StatusCode::CONFLICT,
            ApiError::Storage(_) => StatusCode::SERVICE_UNAVAILABLE,
        }
    }

    fn body(self) -> ErrorBody {
        let (error, message, errors, balance) = match self {
            ApiError::MissingToken => ("missing_token", "a token is required".to_string(), vec![], None),
            ApiError::MalformedToken(m) => ("malformed_token", m, vec![], None),
            ApiError::UnknownPlayer => ("unknown_player", "no account for this token".into(), vec![], None),
            ApiError::Forbidden => ("forbidden", "admin credential required".into(), vec![], None),
            ApiError::Validation(errors) => ("validation", "some fields are invalid".into(), errors, None),
            ApiError::BadRequest(m) => ("bad_request", m, vec![], None),
            ApiError::RunRejected { balance } => (
                "run_rejected",
                format!("balance is {balance}; runs are allowed only while the balance is positive"),
                vec![],
                Some(balance),
            ),
            ApiError::RunsNotOpen(week) => ("runs_not_open", format!("runs are not open in week {week}"), vec![], None),
            ApiError::Duplicate(who) => ("duplicate_player", format!("account {who} already exists"), vec![], None),
            ApiError::Storage(m) => ("storage", m, vec![], None),
        };
        ErrorBody {
            error: error.into(),
            message,
            errors,
            balance,
        }
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Token(t) => ApiError::MalformedToken(t.to_string()),
            GameError::UnknownPlayer => ApiError::UnknownPlayer,
            GameError::DuplicatePlayer(who) => ApiError::Duplicate(who),
            GameError::RunsNotOpen(w) => ApiError::RunsNotOpen(w),
            GameError::RunRejected { balance } => ApiError::RunRejected { balance },
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        (status, Json(self.body())).into_response()
    }
}
