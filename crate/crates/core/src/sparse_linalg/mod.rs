//! Sparse kernels: CSR storage and mat-vec, Jacobi-preconditioned conjugate
//! gradients, a dense LU oracle and inverse iteration for the smallest
//! eigenvalue of a symmetric pencil.

mod cg;
mod csr;
mod dense;
mod eigen;

pub use cg::{cg_solve, cg_solve_from, CgSolution, LinearSystem, Preconditioner};
pub use csr::{axpy, dot, norm2, CsrMatrix};
pub use dense::{dense_matvec, dense_solve, DENSE_SOLVE_MAX_DIM};
pub use eigen::{smallest_generalized_eigenvalue, EigenPair, EIGEN_MAX_OUTER};
