use rayon::prelude::*;

use crate::error::Result;

/// Paths per work unit. Fixed so that the reduction tree does not depend on
/// the number of worker threads.
pub const BLOCK_PATHS: u64 = 64;

pub(crate) trait Merge {
    fn merge(&mut self, other: Self);
}

/// Run `step(acc, m)` for `m in 0..paths`, in blocks of [`BLOCK_PATHS`] on the
/// current rayon pool, and fold the block accumulators in block order.
///
/// The returned error is the one from the lowest failing block.
pub(crate) fn run_blocks<A, I, F>(paths: u64, init: I, step: F) -> Result<A>
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
{
    let blocks = paths.div_ceil(BLOCK_PATHS);
    let parts: Vec<Result<A>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for m in b * BLOCK_PATHS..((b + 1) * BLOCK_PATHS).min(paths) {
                step(&mut acc, m)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}

/// Per-path samples gathered in path order.
#[derive(Debug, Default, Clone)]
pub(crate) struct Samples(pub Vec<f64>);

impl Merge for Samples {
    fn merge(&mut self, other: Self) {
        self.0.extend(other.0);
    }
}
