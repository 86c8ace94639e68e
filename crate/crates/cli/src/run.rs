//! Parallel replicate evaluation.

use dendrotest_core::permtest::PermutationTest;
use dendrotest_core::{GroupedSample, TestConfig, TestResult};
use rayon::prelude::*;

use crate::error::{DataError, Result};

/// Environment variable that caps the number of worker threads.
pub const THREADS_VAR: &str = "DENDROTEST_THREADS";

/// The thread count requested through [`THREADS_VAR`], if any.
pub fn thread_override() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(DataError::invalid(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Runs `f` on a pool honoring [`THREADS_VAR`], or on the global pool.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match thread_override()? {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| DataError::invalid(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn worker_count() -> usize {
    thread_override().ok().flatten().unwrap_or_else(rayon::current_num_threads)
}

/// Same result as [`dendrotest_core::perm_test`], with replicates spread
/// over the current rayon pool.
pub fn par_perm_test(sample: &GroupedSample, g1: &str, g2: &str, config: &TestConfig) -> Result<TestResult> {
    let test = PermutationTest::new(sample, g1, g2, config)?;
    let replicates = (0..config.permutations)
        .into_par_iter()
        .map(|i| test.replicate(i))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(test.finish(&replicates)?)
}
