//! Laurent coefficients and regular/principal splitting by discretized
//! Cauchy integrals on a circle.
//!
//! The coefficient integral `(1/2 pi i) \oint F(s) s^{-k} ds/s` over the
//! sample circle is discretized by the trapezoid rule, i.e. a discrete
//! Fourier transform of the samples. This is exact for Laurent polynomials
//! whose exponents fit inside the sampling bandwidth and spectrally
//! accurate for functions analytic on an annulus around the circle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::sampled::{sup_norm_on_grid, SampledMatrixFunction};

/// Starting sample count for auto-resolved grids.
pub const DEFAULT_SAMPLES: usize = 256;
/// Auto-doubling stops here.
pub const MAX_SAMPLES: usize = 4096;
/// A grid is adequate once [`aliasing_check`] falls below this.
pub const ALIASING_TOL: f64 = 1e-9;
/// Interior Cauchy sums are only trusted for `|z| < GUARD * radius`.
pub const GUARD: f64 = 0.9;

/// Laurent coefficients `F_k` for `k` in `k_min..=k_max`, extracted from
/// samples on a circle of radius `source_radius`.
#[derive(Debug, Clone)]
pub struct LaurentWindow {
    k_min: i64,
    coeffs: Vec<ComplexMatrix>,
    source_radius: f64,
    aliasing: f64,
}

impl LaurentWindow {
    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coeffs.len() as i64 - 1
    }

    pub fn source_radius(&self) -> f64 {
        self.source_radius
    }

    /// Discrepancy between this window and the one obtained from every
    /// other sample, relative to the sample sup-norm. `INFINITY` when the
    /// grid is too coarse to halve.
    pub fn aliasing(&self) -> f64 {
        self.aliasing
    }

    pub fn coeff(&self, k: i64) -> Option<&ComplexMatrix> {
        if k < self.k_min || k > self.k_max() {
            return None;
        }
        self.coeffs.get((k - self.k_min) as usize)
    }

    /// `sum_k F_k z^k` over the window.
    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let m = self.coeffs[0].size();
        let mut acc = ComplexMatrix::zeros(m);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.k_min + i as i64;
            acc += &c.scale(z.powi(k as i32));
        }
        acc
    }
}

/// Normalized coefficients `F_k rho^k` (plain discrete Fourier sums of the
/// samples), free of the radius powers that overflow for small circles.
fn fourier_coefficients(f: &SampledMatrixFunction, k_min: i64, k_max: i64) -> Vec<ComplexMatrix> {
    let grid = f.grid();
    let weight = Complex64::new(1.0 / grid.len() as f64, 0.0);
    (k_min..=k_max)
        .map(|k| {
            let mut acc = ComplexMatrix::zeros(f.m());
            for (j, v) in f.values().iter().enumerate() {
                acc += &v.scale(grid.phase_power(j, k));
            }
            acc.scale(weight)
        })
        .collect()
}

/// Trapezoid coefficients without any bandwidth check.
fn raw_coefficients(f: &SampledMatrixFunction, k_min: i64, k_max: i64) -> Vec<ComplexMatrix> {
    let rho = f.grid().radius();
    fourier_coefficients(f, k_min, k_max)
        .into_iter()
        .zip(k_min..=k_max)
        .map(|(c, k)| c.scale(Complex64::new(rho.powi(-(k as i32)), 0.0)))
        .collect()
}

/// Max discrepancy between normalized coefficients from all samples and
/// from every other sample, relative to the sample sup-norm.
fn window_aliasing(f: &SampledMatrixFunction, k_min: i64, k_max: i64) -> f64 {
    if f.grid().len() < 8 {
        return f64::INFINITY;
    }
    let coarse_fn = match f.subsample(2) {
        Ok(c) => c,
        Err(_) => return f64::INFINITY,
    };
    let scale = sup_norm_on_grid(f);
    if scale == 0.0 {
        return 0.0;
    }
    let fine = fourier_coefficients(f, k_min, k_max);
    let coarse = fourier_coefficients(&coarse_fn, k_min, k_max);
    let worst = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0_f64, f64::max);
    worst / scale
}

/// Laurent coefficients `F_k`, `k_min <= k <= k_max`, by the trapezoid
/// rule on the function's own grid. Requires `M > 2 (k_max - k_min)`.
pub fn laurent_coefficients(f: &SampledMatrixFunction, k_min: i64, k_max: i64) -> Result<LaurentWindow> {
    if k_max < k_min {
        return Err(Error::InvalidInput(format!("empty window {k_min}..={k_max}")));
    }
    let len = f.grid().len() as i64;
    if len <= 2 * (k_max - k_min) {
        return Err(Error::BandwidthExceeded(format!(
            "window {k_min}..={k_max} needs more than {} samples, grid has {len}",
            2 * (k_max - k_min)
        )));
    }
    let coeffs = raw_coefficients(f, k_min, k_max);
    let aliasing = window_aliasing(f, k_min, k_max);
    Ok(LaurentWindow { k_min, coeffs, source_radius: f.grid().radius(), aliasing })
}

/// Negative-power part `sum_{j=1}^q F_{-j} z^{-j}` of a function with at
/// most a pole of order `q` at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalPart {
    m: usize,
    /// `coeffs[j - 1]` multiplies `z^{-j}`.
    coeffs: Vec<ComplexMatrix>,
}

impl PrincipalPart {
    pub fn zero(m: usize) -> Self {
        PrincipalPart { m, coeffs: Vec::new() }
    }

    /// From coefficients of `z^-1, z^-2, ...`.
    pub fn from_coeffs(m: usize, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.size() != m) {
            return Err(Error::SizeMismatch { expected: m, found: bad.size() });
        }
        Ok(PrincipalPart { m, coeffs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Declared pole-order bound.
    pub fn q(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^{-j}`, `j >= 1`.
    pub fn coeff(&self, j: usize) -> Option<&ComplexMatrix> {
        if j == 0 {
            return None;
        }
        self.coeffs.get(j - 1)
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// Exact evaluation `sum_j F_{-j} z^{-j}` (Horner in `1/z`).
    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let w = 1.0 / z;
        let mut acc = ComplexMatrix::zeros(self.m);
        for c in self.coeffs.iter().rev() {
            acc = (&acc + c).scale(w);
        }
        acc
    }

    /// Highest `j` whose term `|F_{-j}| radius^{-j}` on the circle
    /// `|z| = radius` exceeds `floor`.
    pub fn measured_order(&self, radius: f64, floor: f64) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .rposition(|(i, c)| c.norm() * radius.powi(-(i as i32 + 1)) > floor)
            .map_or(0, |i| i + 1)
    }
}

/// Principal part of a function with at most a pole of order `q` at 0.
pub fn principal_part(f: &SampledMatrixFunction, q: usize) -> Result<PrincipalPart> {
    if q == 0 {
        return Ok(PrincipalPart::zero(f.m()));
    }
    let window = laurent_coefficients(f, -(q as i64), -1)?;
    // window runs k = -q..=-1; principal part is indexed by j = -k
    let coeffs = (1..=q as i64).map(|j| window.coeff(-j).cloned().expect("in window")).collect();
    Ok(PrincipalPart { m: f.m(), coeffs })
}

/// `F^+(z)` for `|z| < 0.9 rho` via the trapezoid Cauchy sum of `F - F^-`.
pub fn regular_part_eval(f: &SampledMatrixFunction, fm: &PrincipalPart, z: Complex64) -> Result<ComplexMatrix> {
    let grid = f.grid();
    let limit = GUARD * grid.radius();
    if z.norm() >= limit {
        return Err(Error::OutsideGuardBand { z, limit });
    }
    if fm.m() != f.m() {
        return Err(Error::SizeMismatch { expected: f.m(), found: fm.m() });
    }
    let weight = 1.0 / grid.len() as f64;
    let mut acc = ComplexMatrix::zeros(f.m());
    for (k, v) in f.values().iter().enumerate() {
        let s = grid.node(k);
        let regular = v - &fm.eval(s);
        acc += &regular.scale(s / (s - z));
    }
    Ok(acc.scale(Complex64::new(weight, 0.0)))
}

/// Grid-adequacy certificate: max discrepancy (relative to the sample
/// sup-norm) between the Fourier coefficients `F_k rho^k`, `|k| < M/4`,
/// computed from `M` samples and from every other sample. Returns
/// `INFINITY` for grids with fewer than 8 nodes.
pub fn aliasing_check(f: &SampledMatrixFunction) -> f64 {
    let len = f.grid().len();
    if len < 8 {
        return f64::INFINITY;
    }
    let half = (len / 4) as i64 - 1;
    window_aliasing(f, -half, half)
}

/// Doubles the sample count (resampling through the evaluator) until the
/// aliasing certificate drops below [`ALIASING_TOL`].
pub fn resolve(f: SampledMatrixFunction) -> Result<SampledMatrixFunction> {
    let mut current = f;
    loop {
        let alias = aliasing_check(&current);
        if alias < ALIASING_TOL {
            return Ok(current);
        }
        let len = current.grid().len();
        if len >= MAX_SAMPLES || current.evaluator().is_none() {
            return Err(Error::BandwidthExceeded(format!(
                "aliasing {alias:e} at M = {len} (limit M = {MAX_SAMPLES})"
            )));
        }
        current = current.resample(current.grid().refined())?;
    }
}
