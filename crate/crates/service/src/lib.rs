//! REST service for live debates.
//!
//! Forecasters create debates, add arguments, vote and predict over HTTP;
//! the service answers with each forecaster's derived graph, coherence
//! verdicts and the raw vs. coherent group forecast. State is event sourced
//! (see [`store`]) and all mutations go through optimistic version checks.
//!
//! Environment:
//!
//! - `ARGUCAST_ADDR`: listen address, default `127.0.0.1:8080`
//! - `ARGUCAST_DATA_DIR`: data directory, default `argucast-data`
//! - `ARGUCAST_EPSILON`: default ε, default `0.05`

pub mod api;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use argucast_core::coherence::DEFAULT_EPSILON;

pub use api::{router, AppState};
pub use store::{Debate, DebateSnapshot, DebateStore, Event, LoggedEvent, StoreError};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "argucast-data";

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{name}: {message}")]
    Config { name: &'static str, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    pub epsilon: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            addr: DEFAULT_ADDR.parse().expect("static address"),
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl Config {
    pub fn from_env() -> Result<Self, ServeError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ServeError> {
        let mut cfg = Config::default();
        if let Some(a) = get("ARGUCAST_ADDR") {
            cfg.addr = a.parse().map_err(|e| ServeError::Config {
                name: "ARGUCAST_ADDR",
                message: format!("{e}"),
            })?;
        }
        if let Some(d) = get("ARGUCAST_DATA_DIR") {
            cfg.data_dir = PathBuf::from(d);
        }
        if let Some(e) = get("ARGUCAST_EPSILON") {
            cfg.epsilon = e
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| ServeError::Config {
                    name: "ARGUCAST_EPSILON",
                    message: format!("`{e}` is not a number in [0, inf)"),
                })?;
        }
        Ok(cfg)
    }
}

/// Loads the data directory and serves until ctrl-c.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let store = Arc::new(DebateStore::open(&config.data_dir)?);
    tracing::info!(debates = store.ids().len(), dir = %config.data_dir.display(), "loaded");
    let app = router(AppState {
        store,
        epsilon: config.epsilon,
    });
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.addr,
            source,
        })?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
