//! Switch between the rayon-backed and the plain sequential evaluation of
//! data-parallel loops.
//!
//! Every loop routed through here produces results in input order, so the
//! output is identical whichever strategy runs it.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluation strategy for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work stealing when the `parallel` feature is enabled,
    /// sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually fans out in this build.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Maps `f` over `0..n`, preserving index order.
    pub fn map_indices<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving element order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => items.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let seq = Execution::Sequential.map_indices(1000, |i| (i as f64).sqrt());
        let par = Execution::Parallel.map_indices(1000, |i| (i as f64).sqrt());
        assert_eq!(seq, par);
        let words = ["a", "bb", "ccc"];
        assert_eq!(
            Execution::Parallel.map_slice(&words, |w| w.len()),
            vec![1, 2, 3]
        );
    }
}
