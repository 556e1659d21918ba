//! Conversational session service over nlds-core: sessions with logs and
//! replay, and the HTTP API the chat UI talks to.

pub mod api;
pub mod session;

pub use api::router;
pub use session::{
    read_log, replay, Dataset, DatasetError, Diagnostics, ExecutionResult, FeedbackEntry, LogEvent, QuestionResponse,
    ReplayReport, Service, ServiceError, Session, SessionTurn,
};
