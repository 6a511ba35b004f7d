//! Matrix-finite operators on finite windows.
//!
//! An operator is matrix-finite when every row and every column of its matrix
//! (in the fixed basis `e_1, e_2, ...`) has at most `k` nonzero entries. This
//! crate works with truncations of such operators to a window `[1..N]` and
//! carries exact sparsity profiles as certificates alongside the numerics.
//!
//! Indices are 0-based in the API; the text formats in [`io`] are 1-based.

pub mod coarse;
pub mod constructions;
pub mod dense;
pub mod error;
pub mod expander;
pub mod ghost;
pub mod io;
pub mod kuiper;
pub mod report;
pub mod rng;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sparse::{best_k_sparse_column_error, LineDecomposition, SparseOp, SparsityProfile};

/// Shorthand for a real number as a complex scalar.
#[inline]
pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
