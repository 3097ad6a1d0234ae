//! Data-parallel evaluation of independent tasks.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs on
//! the rayon global pool, or on whatever pool the caller installed. Without
//! the feature every mode runs sequentially. Results always come back in task
//! index order, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run tasks in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like [`Execution::map`], stopping at the lowest-index error.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let seq = Execution::Sequential.map(1000, f);
        let par = Execution::Parallel.map(1000, f);
        assert_eq!(seq, par);
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
