//! JSON over HTTP for the chat UI.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nlds_core::nl::Synonym;
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};

use crate::session::{ExecutionResult, QuestionResponse, Service, ServiceError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::SessionNotFound(_)
            | ServiceError::TurnNotFound(_)
            | ServiceError::CandidateNotFound { .. } => StatusCode::NOT_FOUND,
            ServiceError::Validation(_) | ServiceError::Vocabulary(_) => StatusCode::BAD_REQUEST,
            ServiceError::Execution(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Io(_) | ServiceError::Log { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({ "error": self.to_string() });
        if let ServiceError::Execution(e) = &self {
            body["statement_index"] = json!(e.statement_index());
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

#[derive(Deserialize)]
struct QuestionBody {
    text: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExecuteBody {
    Candidate { turn_id: u64, candidate_id: String },
    Raw { raw_script: String },
}

#[derive(Deserialize)]
struct FeedbackBody {
    turn_id: u64,
    stars: i64,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/schema", get(schema))
        .route("/api/summary", get(summary))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/question", post(question))
        .route("/api/session/{id}/execute", post(execute))
        .route("/api/session/{id}/feedback", post(feedback))
        .route("/api/session/{id}/vocabulary", post(vocabulary))
        .route("/api/session/{id}/summary", get(session_summary))
        .with_state(service)
}

async fn schema(State(service): State<Arc<Service>>) -> Json<JsonValue> {
    Json(json!(service.dataset.schema))
}

async fn summary(State(service): State<Arc<Service>>) -> Json<JsonValue> {
    Json(json!(service.dataset.summary))
}

async fn create_session(State(service): State<Arc<Service>>) -> Result<(StatusCode, Json<JsonValue>), ServiceError> {
    let id = service.create_session()?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))))
}

async fn question(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(body): Json<QuestionBody>,
) -> ApiResult<QuestionResponse> {
    service.with_session(&id, |s, _| s.post_question(&body.text)).map(Json)
}

async fn execute(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(body): Json<ExecuteBody>,
) -> ApiResult<ExecutionResult> {
    service
        .with_session(&id, |s, d| match &body {
            ExecuteBody::Candidate { turn_id, candidate_id } => s.execute_candidate(d, *turn_id, candidate_id),
            ExecuteBody::Raw { raw_script } => s.execute_raw(d, raw_script),
        })
        .map(Json)
}

async fn feedback(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(body): Json<FeedbackBody>,
) -> ApiResult<JsonValue> {
    let entries = service.with_session(&id, |s, _| s.record_feedback(body.turn_id, body.stars))?;
    Ok(Json(json!({ "feedback": entries })))
}

async fn vocabulary(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(synonym): Json<Synonym>,
) -> ApiResult<JsonValue> {
    let version = service.add_synonym(&id, synonym)?;
    Ok(Json(json!({ "lexicon_version": version })))
}

async fn session_summary(State(service): State<Arc<Service>>, Path(id): Path<String>) -> ApiResult<JsonValue> {
    service
        .with_session(&id, |s, d| {
            Ok(json!({
                "summary": d.summary,
                "schema": d.schema,
                "lexicon_version": s.lexicon_version(),
                "views": s.view_names(),
                "turns": s.turns().len(),
                "feedback": s.feedback_summary(),
            }))
        })
        .map(Json)
}
