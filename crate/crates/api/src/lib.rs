//! HTTP face of the Web TV content management system.
//!
//! Everything under `/api/v1` except `/login` needs a bearer token from
//! `/login`. Published media (`/media/<serial>/<file>`) and demo fixtures
//! (`/fixtures/...`) are public.

pub mod auth;
pub mod error;
mod extract;
mod routes;
pub mod views;

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;
use webtv_core::Cms;

pub use auth::{hash_password, Session, SessionStore, UserFileError, UserStore};
pub use error::ApiError;
pub use routes::router;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(12 * 60 * 60);

struct Inner {
    cms: Cms,
    users: UserStore,
    sessions: SessionStore,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(cms: Cms, users: UserStore, session_ttl: Duration) -> Self {
        Self(Arc::new(Inner {
            cms,
            users,
            sessions: SessionStore::new(session_ttl),
        }))
    }

    pub fn cms(&self) -> &Cms {
        &self.0.cms
    }

    pub fn users(&self) -> &UserStore {
        &self.0.users
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.0.sessions
    }
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve<F>(listener: TcpListener, state: AppState, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    let sweeper = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                state.sessions().sweep();
            }
        })
    };
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await;
    sweeper.abort();
    result
}
