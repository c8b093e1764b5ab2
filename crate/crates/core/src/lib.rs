//! Finite-element simulator for a bidomain model of cardiac tissue with a
//! passive diffusive inclusion, coupled through a resistive-capacitive
//! interface law, together with the numerical checks that go with it:
//! liftings, the coercive bilinear form, energy ledgers, manufactured
//! solutions and stability studies.
//!
//! The pieces, bottom up:
//!
//! - [`mesh`]: interval, split-rectangle and inclusion meshes with labeled regions.
//! - [`model`]: conductivities and the affine gating model.
//! - [`discretization`]: P1 dof layout with duplicated interface nodes, assembly.
//! - [`sparse_linalg`]: CSR, conjugate gradients, dense LU, inverse iteration.
//! - [`stepper`]: semi-implicit time stepping of `(V, U, w)`.
//! - [`analysis`]: lifting, bilinear form, shifted problem, studies.
//! - [`cli_io`]: configuration, CSV/VTK output and the command driver.

// `!(x > 0.0)` is deliberate: it also rejects NaN. Index loops read better in the numerics.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::type_complexity
)]

pub mod analysis;
pub mod cli_io;
pub mod discretization;
pub mod error;
pub mod mesh;
pub mod model;
pub mod sparse_linalg;
pub mod stepper;

pub use error::{Error, Result};
