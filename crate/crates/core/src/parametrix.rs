//! Assembly of the local parametrix `P(z) = E0(z) Psi(n^b f(z)) D(z) e^{n Dphi(z)}`,
//! the analytic factor `E`, and the natural remainder coefficient `C` from
//! single-point handles.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::matrix::{mat_inv, ComplexMatrix};
use crate::profile::ExponentProfile;
use crate::sampled::{matrix_fn, MatrixFn, SampledMatrixFunction};

/// Single-point evaluator of a scalar function.
pub type ScalarFn = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

pub fn scalar_fn<F>(f: F) -> ScalarFn
where
    F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Default number of nodes on the inner circle.
pub const DEFAULT_NODES: usize = 256;

/// The ingredients of a local parametrix. Handles are evaluated pointwise
/// and never continued analytically; sector-dependent handles should branch
/// on `arg(zeta)` themselves.
#[derive(Clone)]
pub struct ParametrixAssembly {
    pub m: usize,
    pub profile: ExponentProfile,
    /// Bare parametrix `Psi(zeta)`.
    pub psi: MatrixFn,
    /// Power-law factor `B(zeta)`.
    pub b_factor: MatrixFn,
    /// Diagonal exponent `theta(zeta)`.
    pub theta: MatrixFn,
    /// Szego factor `D(z)`.
    pub d: MatrixFn,
    /// Diagonal `D_phi(z)`.
    pub dphi: MatrixFn,
    /// Conformal map with `f(0) = 0`.
    pub f: ScalarFn,
    /// Initial prefactor guess; `None` means `I`.
    pub ering: Option<MatrixFn>,
    /// Global parametrix `N(z)`.
    pub n_global: MatrixFn,
    /// `C_1, ..., C_k` of the asymptotic series of `Psi`.
    pub ck: Vec<ComplexMatrix>,
    /// Nodes on the inner circle.
    pub nodes: usize,
}

fn handle_err(z: Complex64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Handle { .. } => e,
        other => Error::Handle { z, message: other.to_string() },
    }
}

fn checked(h: &MatrixFn, z: Complex64, m: usize) -> Result<ComplexMatrix> {
    let v = h(z).map_err(handle_err(z))?;
    if v.size() != m {
        return Err(Error::SizeMismatch { expected: m, found: v.size() });
    }
    if !v.is_finite() {
        return Err(Error::Handle { z, message: "non-finite value".into() });
    }
    Ok(v)
}

fn exp_diagonal(d: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    if !d.is_diagonal() {
        return Err(Error::Handle { z, message: "exponent handle is not diagonal".into() });
    }
    Ok(ComplexMatrix::diag(&d.diagonal().iter().map(|v| v.exp()).collect::<Vec<_>>()))
}

impl ParametrixAssembly {
    /// The staggered inner grid `|z| = n^-a`.
    pub fn inner_grid(&self, n: f64) -> Result<CircleGrid> {
        CircleGrid::staggered(self.profile.inner_radius(n), self.nodes)
    }

    fn zeta(&self, n: f64, z: Complex64) -> Result<Complex64> {
        let fz = (self.f)(z).map_err(handle_err(z))?;
        Ok(n.powf(self.profile.b) * fz)
    }

    /// `P(z)` at one point.
    pub fn ring_p_at(&self, n: f64, z: Complex64) -> Result<ComplexMatrix> {
        let m = self.m;
        let zeta = self.zeta(n, z)?;
        let psi = checked(&self.psi, zeta, m)?;
        let d = checked(&self.d, z, m)?;
        let dphi = checked(&self.dphi, z, m)?;
        let mut out = &(&psi * &d) * &exp_diagonal(&dphi.scale(Complex64::new(n, 0.0)), z)?;
        if let Some(e0) = &self.ering {
            out = &checked(e0, z, m)? * &out;
        }
        Ok(out)
    }

    /// `E(z) = N(z) D(z)^-1 e^{-n Dphi(z) - theta(n^b f(z))} B(n^b f(z))^-1`.
    pub fn e_at(&self, n: f64, z: Complex64) -> Result<ComplexMatrix> {
        if self.ering.is_some() {
            return Err(Error::InvalidInput("E assembly presumes the initial prefactor is I".into()));
        }
        let m = self.m;
        let zeta = self.zeta(n, z)?;
        let nz = checked(&self.n_global, z, m)?;
        let d_inv = mat_inv(&checked(&self.d, z, m)?)?;
        let dphi = checked(&self.dphi, z, m)?;
        let theta = checked(&self.theta, zeta, m)?;
        let expo = exp_diagonal(&(-&(&dphi.scale(Complex64::new(n, 0.0)) + &theta)), z)?;
        let b_inv = mat_inv(&checked(&self.b_factor, zeta, m)?)?;
        Ok(&(&(&nz * &d_inv) * &expo) * &b_inv)
    }

    /// `C(z) = sum_j C_j (z/f(z))^j / (n^b z)^(j-1)`.
    pub fn c_at(&self, n: f64, z: Complex64) -> Result<ComplexMatrix> {
        if self.ck.is_empty() {
            return Err(Error::EmptySeries);
        }
        let fz = (self.f)(z).map_err(handle_err(z))?;
        if fz == Complex64::new(0.0, 0.0) {
            return Err(Error::Handle { z, message: "conformal map vanishes".into() });
        }
        let w = z / fz;
        let step = w / (n.powf(self.profile.b) * z);
        let mut weight = w;
        let mut acc = ComplexMatrix::zeros(self.m);
        for cj in &self.ck {
            acc += &cj.scale(weight);
            weight *= step;
        }
        Ok(acc)
    }

    /// `min |f(z)|/|z|` over the grid: a conformality proxy.
    pub fn conformality(&self, grid: &CircleGrid) -> Result<f64> {
        grid.nodes()
            .into_iter()
            .map(|z| Ok((self.f)(z).map_err(handle_err(z))?.norm() / z.norm()))
            .try_fold(f64::INFINITY, |acc, v: Result<f64>| Ok(acc.min(v?)))
    }
}

fn sampled(asm: &ParametrixAssembly, n: f64, pole: usize, f: impl Fn(&ParametrixAssembly, f64, Complex64) -> Result<ComplexMatrix> + Send + Sync + 'static) -> Result<SampledMatrixFunction> {
    let grid = asm.inner_grid(n)?;
    let owned = asm.clone();
    SampledMatrixFunction::from_fn(grid, asm.m, matrix_fn(move |z| f(&owned, n, z)), pole)
}

/// `P` on the inner circle, with an evaluator.
pub fn assemble_ring_p(asm: &ParametrixAssembly, n: f64) -> Result<SampledMatrixFunction> {
    sampled(asm, n, 0, ParametrixAssembly::ring_p_at)
}

/// `E` on the inner circle, with an evaluator. Whether `E` really is
/// analytic and satisfies the growth hypotheses is for the caller to
/// check (see `verify::hypothesis_probe`).
pub fn assemble_e(asm: &ParametrixAssembly, n: f64) -> Result<SampledMatrixFunction> {
    sampled(asm, n, 0, ParametrixAssembly::e_at)
}

/// The natural `C` on the inner circle. Pole-order bound `k - 1`.
pub fn assemble_c_natural(asm: &ParametrixAssembly, n: f64) -> Result<SampledMatrixFunction> {
    if asm.ck.is_empty() {
        return Err(Error::EmptySeries);
    }
    sampled(asm, n, asm.ck.len() - 1, ParametrixAssembly::c_at)
}

/// `c = (b - a)(k + 1)` obtained by keeping `k` series terms.
pub fn effective_c(profile: &ExponentProfile, k: usize) -> f64 {
    (profile.b - profile.a) * (k as f64 + 1.0)
}

/// `sup_nodes |P N^-1 E - I - C/(n^b z)|`.
pub fn expansion_residual(
    ring_p: &SampledMatrixFunction,
    n_fn: &SampledMatrixFunction,
    e: &SampledMatrixFunction,
    c: &SampledMatrixFunction,
    n: f64,
    profile: &ExponentProfile,
) -> Result<f64> {
    let grid = ring_p.grid();
    for other in [n_fn, e, c] {
        if other.grid() != grid {
            return Err(Error::InvalidGrid("expansion residual needs one shared grid".into()));
        }
    }
    let scale = n.powf(profile.b);
    let id = ComplexMatrix::identity(ring_p.m());
    let mut worst = 0.0_f64;
    for k in 0..grid.len() {
        let z = grid.node(k);
        let lhs = &(ring_p.value(k) * &mat_inv(n_fn.value(k))?) * e.value(k);
        let rhs = &id + &c.value(k).scale(1.0 / (scale * z));
        worst = worst.max((&lhs - &rhs).norm());
    }
    Ok(worst)
}
