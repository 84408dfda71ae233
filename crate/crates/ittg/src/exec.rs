//! Execution strategy for the data-parallel sweeps.
//!
//! Every heavy loop in this crate (brute-force enumeration, statevector
//! updates, graph-class enumeration) is a data-parallel map whose result is
//! independent of the split, so both modes produce bit-identical output.
//! `Parallel` uses rayon and is the default when the `parallel` feature is
//! enabled; without the feature both modes run sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

impl ExecMode {
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    pub(crate) fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `range` and collects the `Some` results in range order.
pub(crate) fn collect_filtered<T, F>(range: Range<u64>, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().filter_map(f).collect();
    }
    let _ = mode;
    range.filter_map(f).collect()
}

/// Whether `pred` holds anywhere in `range`.
pub(crate) fn any<F>(range: Range<u64>, mode: ExecMode, pred: F) -> bool
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().any(pred);
    }
    let _ = mode;
    range.into_iter().any(pred)
}

/// Folds `f` over `range` with a commutative, associative merge.
pub(crate) fn map_reduce<T, F, M>(range: Range<u64>, mode: ExecMode, identity: T, f: F, merge: M) -> T
where
    T: Send + Sync + Clone,
    F: Fn(u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        // chunked fold keeps the per-item merge cost off the hot path
        let chunk = 1u64 << 12;
        let starts: Vec<u64> = range.clone().step_by(chunk as usize).collect();
        return starts
            .into_par_iter()
            .map(|start| {
                (start..(start + chunk).min(range.end))
                    .map(&f)
                    .fold(identity.clone(), &merge)
            })
            .reduce(|| identity.clone(), &merge);
    }
    let _ = mode;
    range.map(f).fold(identity, merge)
}
