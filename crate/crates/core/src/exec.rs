// SPDX-License-Identifier: Apache-2.0

//! Data-parallel execution over independent work items (tiles, windows,
//! shape pairs). With the `parallel` feature the work is spread over the
//! current rayon pool; without it, or with [`Exec::Sequential`], items run
//! in order on the calling thread. Results are always returned in item
//! order, so output never depends on the choice.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Number of workers this executor will use.
    pub fn workers(self) -> usize {
        match self {
            Exec::Sequential => 1,
            #[cfg(feature = "parallel")]
            Exec::Parallel => rayon::current_num_threads(),
            #[cfg(not(feature = "parallel"))]
            Exec::Parallel => 1,
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn try_for_each_range<E, F>(self, n: usize, f: F) -> Result<(), E>
    where
        E: Send,
        F: Fn(usize) -> Result<(), E> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().try_for_each(f),
            _ => (0..n).try_for_each(f),
        }
    }
}
