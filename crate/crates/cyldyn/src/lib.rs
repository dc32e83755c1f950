//! Rendering, command-line and HTTP front ends for `cyldyn-core`.

pub mod cli;
pub mod formats;
pub mod render;
pub mod service;

pub use cyldyn_core as core;

/// Sizes the global worker pool from `CYLDYN_THREADS`, if set.
pub fn init_threads() -> Result<usize, String> {
    if let Ok(v) = std::env::var("CYLDYN_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("CYLDYN_THREADS must be a positive integer, got `{v}`"))?;
        // a second call finds the pool already built; that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(rayon::current_num_threads())
}
