//! HTTP session API for exploring relevance bounds interactively.
//!
//! A client uploads a CSV dataset, which is analysed once; it can then
//! fetch the results and repeatedly re-solve the bounds under per-feature
//! constraints. Sessions live in memory and expire after a period of
//! inactivity.

mod api;
mod error;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

pub use api::{router, ConstraintResponse, CreateRequest, CreateResponse, SessionParams};
pub use error::ApiError;
pub use session::{Clock, ManualClock, Session, SessionSnapshot, SessionStore, SystemClock};

use relint_core::pool::WorkerPool;

pub const DEFAULT_MAX_BODY: usize = 2 * 1024 * 1024;
pub const DEFAULT_TTL: Duration = Duration::from_secs(60 * 60);
pub const DEFAULT_COMPUTE_BUDGET: Duration = Duration::from_secs(60);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest accepted request body in bytes.
    pub max_body: usize,
    /// Inactivity period after which a session is dropped.
    pub ttl: Duration,
    /// Wall-clock limit for one constraint recomputation.
    pub compute_budget: Duration,
    /// Allowed CORS origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    /// Directory served for paths outside the API, e.g. the UI bundle.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_body: DEFAULT_MAX_BODY,
            ttl: DEFAULT_TTL,
            compute_budget: DEFAULT_COMPUTE_BUDGET,
            cors_origins: Vec::new(),
            static_dir: None,
        }
    }
}

/// Shared state behind every handler.
pub struct AppState {
    pub config: ServiceConfig,
    pub store: SessionStore,
    pub pool: WorkerPool,
}

impl AppState {
    pub fn new(config: ServiceConfig, pool: WorkerPool, clock: Arc<dyn Clock>) -> Arc<Self> {
        let store = SessionStore::new(config.ttl, clock);
        Arc::new(Self { config, store, pool })
    }
}

/// Serves the API on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let sweeper = {
        let state = Arc::clone(&state);
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                state.store.evict_expired();
            }
        })
    };
    let app = router(state).into_make_service_with_connect_info::<SocketAddr>();
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    sweeper.abort();
    result
}
