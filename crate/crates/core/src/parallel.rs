//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon global pool; without it every call runs sequentially.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// True when work actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `items.iter().map(f).collect()`, order preserved.
pub fn map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Sum of `f(i)` over `0..len`. The parallel reduction splits the range into
/// fixed chunks summed in order, so the result does not depend on the number
/// of threads.
pub fn sum_indexed<F>(len: usize, exec: Execution, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1024;
    let chunks: Vec<usize> = (0..len.div_ceil(CHUNK)).collect();
    let partial = map(&chunks, exec, |&c| {
        (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum::<f64>()
    });
    partial.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let xs: Vec<f64> = (0..5000).map(|i| (i as f64).sin()).collect();
        let a = map(&xs, Execution::Parallel, |x| x.exp());
        let b = map(&xs, Execution::Sequential, |x| x.exp());
        assert_eq!(a, b);
        let f = |i: usize| (i as f64 * 0.37).cos();
        assert_eq!(
            sum_indexed(10_001, Execution::Parallel, f).to_bits(),
            sum_indexed(10_001, Execution::Sequential, f).to_bits()
        );
        assert_eq!(sum_indexed(0, Execution::Parallel, f), 0.0);
    }
}
