//! Data-parallel iteration with a sequential fallback.
//!
//! With the `parallel` feature (default) this re-exports the rayon traits the
//! crate uses. Without it, shims expose the same method names on plain
//! iterators so call sites compile unchanged. Only per-item work is ever
//! distributed; every reduction is done afterwards in index order.

#[cfg(feature = "parallel")]
pub use rayon::prelude::{
    IndexedParallelIterator, IntoParallelIterator, ParallelIterator,
};

#[cfg(not(feature = "parallel"))]
pub use self::fallback::*;

#[cfg(not(feature = "parallel"))]
mod fallback {
    pub trait IntoParallelIterator {
        type Item;
        type Iter: Iterator<Item = Self::Item>;
        fn into_par_iter(self) -> Self::Iter;
    }

    impl<I: IntoIterator> IntoParallelIterator for I {
        type Item = I::Item;
        type Iter = I::IntoIter;

        fn into_par_iter(self) -> Self::Iter {
            self.into_iter()
        }
    }
}
