//! Small self-contained linear algebra kernels: CSR matrices, Krylov solvers,
//! symmetric tridiagonal eigenproblems and a Lanczos inertia estimate.

pub mod krylov;
pub mod lanczos;
pub mod sparse;
pub mod tridiag;

pub use krylov::{jacobi, minres, pcg, KrylovStats};
pub use sparse::CsrMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
