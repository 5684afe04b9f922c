//! Execution-mode plumbing: rayon data parallelism with a sequential
//! fallback.
//!
//! Every hot kernel is written against [`map_indexed`] / [`for_each_indexed`]
//! so that the same code runs under both modes. With the `parallel` feature
//! (default) the default mode is [`ExecMode::Parallel`]; without it only
//! [`ExecMode::Sequential`] exists and the rayon dependency is dropped
//! entirely. Benches compare the two modes at runtime.
//!
//! Reductions stay deterministic: parallel work produces an indexed `Vec`
//! and any floating-point accumulation happens sequentially afterwards, so
//! results are bit-identical across modes and thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel kernels execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Fallible variant of [`map_indexed`]; the first error wins.
pub fn try_map_indexed<T, E, F>(mode: ExecMode, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_modes_agree() {
        let seq = map_indexed(ExecMode::Sequential, 100, |i| (i as f64).sqrt());
        let def = map_indexed(ExecMode::default(), 100, |i| (i as f64).sqrt());
        assert_eq!(seq, def);
    }
}
