//! Execution schedule for data-parallel loops.
//!
//! Results never depend on the schedule: callers give every work item its own
//! random stream and reduce with order-independent operations.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    /// Uses the rayon pool when built with the `parallel` feature; otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Schedule {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(schedule: Schedule, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = schedule;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..count`, preserving order.
pub fn map_range<R, F>(schedule: Schedule, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = schedule;
    (0..count).map(f).collect()
}

/// Maximum of `f` over `0..count` (NaN-free inputs assumed); `init` for an
/// empty range.
pub fn max_range<F>(schedule: Schedule, count: usize, init: f64, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).reduce(|| init, f64::max);
    }
    let _ = schedule;
    (0..count).map(f).fold(init, f64::max)
}
