//! Live one-lie games over JSON/HTTP.
//!
//! Two session modes:
//!
//! - `machine_asks`: the server runs the questioning strategy and a human
//!   answers, lying at most once.
//! - `human_asks`: a human asks membership questions and a machine responder
//!   (scripted honest liar or weight adversary) answers.
//!
//! Sessions live in memory. Every request is appended to an optional event log
//! (see [`log`]) which is replayed on startup.

pub mod api;
mod error;
pub mod log;
pub mod session;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

pub use api::router;
pub use error::{ErrorBody, ServiceError};
pub use session::{
    AnswerRequest, AnswerResponse, AnswerValue, CreateRequest, CreateResponse, Mode,
    QuestionRequest, QuestionResponse, QuestionView, RangeSpec, ResponderSpec, SessionView, Status,
    SummaryView, TieBreakSpec,
};
pub use store::{ServiceConfig, SessionStore};

/// Serves until ctrl-c, sweeping idle sessions in the background.
pub async fn serve(addr: SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let sweeper = {
        let store = store.clone();
        let period = (store.config().idle_timeout / 4)
            .clamp(Duration::from_secs(1), Duration::from_secs(60));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                store.sweep_expired();
            }
        })
    };
    let result = axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}
