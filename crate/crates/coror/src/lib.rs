//! File formats, dataset handling, evaluation harness and command-line
//! front end for the `coror-core` verification pipeline.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod descfile;
pub mod error;
pub mod export;
pub mod imageio;
pub mod modelfile;
pub mod protocol;
pub mod report;
pub mod templatedb;

pub use error::{Error, Result};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "COROR_THREADS";

/// Runs `f` on a thread pool sized by `COROR_THREADS` when set, otherwise
/// on the global pool.
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match n.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
