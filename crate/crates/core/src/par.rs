//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it, or with [`Execution::Sequential`], the same closures run in
//! order on the calling thread. Results always come back in input order.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && *self == Execution::Parallel
    }
}

/// `items.map(f)` collected in input order.
pub fn map_collect<T, U, F>(execution: Execution, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = execution;
    items.into_iter().map(f).collect()
}

/// Maps then folds with an associative `combine`; the result does not depend
/// on scheduling.
pub fn map_reduce<T, U, F, C>(execution: Execution, items: Vec<T>, identity: U, f: F, combine: C) -> U
where
    T: Send,
    U: Send + Clone + Sync,
    F: Fn(T) -> U + Sync + Send,
    C: Fn(U, U) -> U + Sync + Send,
{
    map_collect(execution, items, f)
        .into_iter()
        .fold(identity, combine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let input: Vec<u64> = (0..1000).collect();
        let seq = map_collect(Execution::Sequential, input.clone(), |x| x * x);
        let par = map_collect(Execution::Parallel, input, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn reduce_matches() {
        let total = map_reduce(Execution::Parallel, (1..=100u64).collect(), 0, |x| x, |a, b| a + b);
        assert_eq!(total, 5050);
    }
}
