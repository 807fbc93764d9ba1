//! Execution policy for the enumeration kernels.
//!
//! Work is always split into the same ordered list of slices; only the way
//! slices are scheduled changes. Results are collected in slice order, so the
//! output never depends on the policy or on the number of worker threads.

/// How to run a sliced computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Rayon work-stealing over slices. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// `f(0), f(1), …, f(len-1)` in index order.
pub fn map_indexed<T, F>(exec: Exec, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Order-preserving map over a slice of items.
pub fn map_items<I, T, F>(exec: Exec, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_policy() {
        let seq = map_indexed(Exec::Sequential, 1000, |i| i * i);
        let par = map_indexed(Exec::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(map_items(Exec::Parallel, &[3, 1, 2], |x| x + 1), vec![4, 2, 3]);
    }
}
