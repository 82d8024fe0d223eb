//! HTTP service exposing caseflow analysis sessions under `/v1`.

pub mod api;
pub mod config;
pub mod error;
pub mod store;

use std::sync::Arc;
use std::time::Duration;

pub use api::router;
pub use config::{ConfigError, ConfigLayer, ServiceConfig};
pub use store::SessionStore;

/// Builds the session store described by `config`.
pub fn open_store(config: &ServiceConfig) -> std::io::Result<Arc<SessionStore>> {
    let store = match &config.data_dir {
        Some(dir) => SessionStore::open(dir, config.idle_expiry)?,
        None => SessionStore::in_memory(config.idle_expiry),
    };
    Ok(Arc::new(store))
}

/// Periodically drops idle sessions.
pub fn spawn_expiry(store: Arc<SessionStore>, every: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(every);
        loop {
            tick.tick().await;
            let dropped = store.expire(chrono::Utc::now());
            if !dropped.is_empty() {
                tracing::info!(count = dropped.len(), "expired idle sessions");
            }
        }
    })
}

/// Serves on `listener` until `shutdown` resolves.
pub async fn serve_with(
    listener: tokio::net::TcpListener,
    config: &ServiceConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let store = open_store(config)?;
    let sweep = (config.idle_expiry / 10).clamp(Duration::from_secs(1), Duration::from_secs(60));
    let expiry = spawn_expiry(store.clone(), sweep);
    let app = router(store, &config.cors_origins);
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    expiry.abort();
    result
}

/// Binds `config.bind` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_with(listener, &config, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
