//! Batch driver for double-matching verification sweeps: JSON configs,
//! parallel n-sweeps, CSV and JSON reports.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Mode, RunConfig};
pub use run::{run, RunOutcome};

/// Worker-count override read from the environment.
pub const THREADS_ENV: &str = "RH_DM_THREADS";

/// Runs `f` on a pool of `RH_DM_THREADS` workers, or on the global pool
/// when the variable is unset.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> anyhow::Result<T> + Send) -> anyhow::Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let threads: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|t| *t > 0)
                .ok_or_else(|| anyhow::anyhow!("{THREADS_ENV} must be a positive integer (got {raw:?})"))?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            pool.install(f)
        }
        Err(_) => f(),
    }
}
