//! Complex linear algebra: compressed sparse storage, sparse LU and dense LU.

mod dense;
mod sparse;

pub use dense::{condition_number, dense_solve, DenseComplexSystem};
pub use sparse::{sparse_lu_solve, SparseLu, SparseMatrix, TripletBuilder};

pub use num_complex::Complex64 as C64;

pub(crate) fn norm_inf(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
