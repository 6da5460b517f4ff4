//! Double-matching analytic prefactors for local/global parametrix pairs of
//! matrix-valued Riemann-Hilbert problems.
//!
//! Given sampled functions `E` and `C` on the shrinking circle
//! `|z| = n^-a`, the crate builds the meromorphic function
//! `F = E C E^-1 / (n^b z)`, iterates the operator
//! `pi F = -F^+ F - F F^- + F^+ F^- + F^+ F F^-`, and assembles the inner
//! prefactor `E_n^0` (analytic in the disc) and the outer prefactor
//! `E_n^inf` (analytic outside it, with inverse a polynomial in `1/z`).
//! The `verify` and `scaling` modules measure the resulting matching rates
//! on synthetic families with known exponents.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod parametrix;
pub mod pi;
pub mod prefactor;
pub mod profile;
pub mod quadrature;
pub mod sampled;
pub mod scaling;
pub mod verify;

pub use error::{Error, Result};
pub use grid::CircleGrid;
pub use matrix::{mat_inv, mat_mul, ComplexMatrix};
pub use num_complex::Complex64;
pub use profile::ExponentProfile;
pub use sampled::{matrix_fn, sup_norm_on_grid, MatrixFn, SampledMatrixFunction};
