//! Command-line front end for `hjbmarch`: configured sweeps, figure
//! reproduction, ground-truth cache management and the self-test.

pub mod config;
pub mod reproduce;
pub mod sweep;

use std::path::PathBuf;

use anyhow::{Context as _, Result};

use hjbmarch::marchers::{ground_truth, TruthCache};
use hjbmarch::problem::{by_name, ProblemParams};
use hjbmarch::selftest::{run_all, CheckOutcome};
use hjbmarch::GridSpec64;

pub const CACHE_ENV: &str = "HJBMARCH_CACHE";

/// Ground-truth cache directory: `HJBMARCH_CACHE`, else the user cache dir.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir).join("hjbmarch");
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("hjbmarch"),
        None => PathBuf::from(".hjbmarch-cache"),
    }
}

/// Makes sure the ground truth for `problem` at `resolution` is cached and
/// returns its path. `force` recomputes even when a valid file exists.
pub fn cmd_truth(
    problem: &str,
    params: &ProblemParams,
    resolution: usize,
    force: bool,
    cache: &TruthCache,
) -> Result<PathBuf> {
    let p = by_name::<f64>(problem, params)?;
    let path = cache.path_for(&p.id(), resolution);
    if force && path.exists() {
        std::fs::remove_file(&path).with_context(|| format!("removing {}", path.display()))?;
    }
    let grid = GridSpec64::unit(2, resolution)?;
    if cache.load::<f64>(&p.id(), &grid).is_none() {
        ground_truth(&*p, resolution, Some(cache))?;
    }
    Ok(path)
}

/// Runs the built-in checks, printing one line each. True when all pass.
pub fn cmd_selftest(seed: u64, mut out: impl std::io::Write) -> Result<(bool, Vec<CheckOutcome>)> {
    let outcomes = run_all(seed);
    for o in &outcomes {
        writeln!(
            out,
            "{} {} ({}; {:.2}s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail,
            o.elapsed.as_secs_f64()
        )?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(
        out,
        "{} of {} checks passed (seed {seed})",
        outcomes.len() - failed,
        outcomes.len()
    )?;
    Ok((failed == 0, outcomes))
}
