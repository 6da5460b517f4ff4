//! Behaviour near the origin: prefactor estimates on `|z| <= rho n^-e`,
//! a synthetic final transformation `R` in Cauchy-integral form, and the
//! kernel sandwich `E_n^0(y_n)^-1 R(y_n)^-1 R(x_n) E_n^0(x_n)` with
//! `x_n = x/(c n^b)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::matrix::{mat_inv, ComplexMatrix};
use crate::prefactor::InnerPrefactor;
use crate::profile::{le, ExponentProfile};
use crate::quadrature::graded_segment;
use crate::sampled::{MatrixFn, SampledMatrixFunction};
use crate::verify::{fit_above_floor, synthetic_prefactors, FloorFit, SyntheticFamily};

/// Relative distance to the contour below which `R` is not evaluated.
pub const CONTOUR_GUARD: f64 = 0.05;
/// Kernel formulas refuse `|x - y|` below this.
pub const DIAGONAL_GUARD: f64 = 1e-6;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// The jump contour of a synthetic `R` and its jump `I + Delta`:
///
/// * inner circle `|s| = n^-a`: `Delta = n^(d-c) U (1 + s/n^-a)/2`
/// * lens rays from `n^-a` to `r`: `Delta = exp(-alpha n |s|^beta) U`
/// * outer circle `|s| = r`: `Delta = n^(d-b) U (1 + s/r)/2`
/// * far rays from `r` to `far_factor r`: `Delta = n^-b U`
///
/// The density is `G = I + X`.
#[derive(Clone)]
pub struct ContourSpec {
    pub profile: ExponentProfile,
    pub alpha: f64,
    pub beta: f64,
    /// Unit-norm jump direction.
    pub u: ComplexMatrix,
    /// Density perturbation; `None` means `X = 0`.
    pub x: Option<MatrixFn>,
    pub lens_angles: Vec<f64>,
    pub far_angles: Vec<f64>,
    pub far_factor: f64,
    pub circle_nodes: usize,
    pub ray_panels: usize,
    pub ray_order: usize,
    /// Set to false to switch all jumps off (`Delta = 0`).
    pub active: bool,
}

impl std::fmt::Debug for ContourSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContourSpec")
            .field("profile", &self.profile)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("lens_angles", &self.lens_angles)
            .field("far_angles", &self.far_angles)
            .field("active", &self.active)
            .finish()
    }
}

impl ContourSpec {
    /// Four lens rays at `pi/4 + k pi/2`, two far rays along the real
    /// axis, `alpha = 1`, `beta = 1/b`, `U` the all-ones `m x m` matrix
    /// (unit in the max-entry norm).
    pub fn default_for(profile: ExponentProfile, m: usize) -> Result<Self> {
        let spec = ContourSpec {
            profile,
            alpha: 1.0,
            beta: 1.0 / profile.b,
            u: ComplexMatrix::from_fn(m, |_, _| Complex64::new(1.0, 0.0)),
            x: None,
            lens_angles: (0..4).map(|k| FRAC_PI_4 + k as f64 * FRAC_PI_2).collect(),
            far_angles: vec![0.0, PI],
            far_factor: 10.0,
            circle_nodes: 256,
            ray_panels: 24,
            ray_order: 32,
            active: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidInput("alpha must be positive".into()));
        }
        if !(self.beta > 0.0) || !(self.beta * self.profile.a < 1.0) {
            return Err(Error::InvalidInput(format!(
                "need 0 < beta < 1/a (beta = {}, a = {})",
                self.beta, self.profile.a
            )));
        }
        if (self.u.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("U must have unit norm".into()));
        }
        if !(self.far_factor > 1.0) {
            return Err(Error::InvalidInput("far rays need far_factor > 1".into()));
        }
        Ok(())
    }
}

/// Which piece of the contour a quadrature node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContourPiece {
    InnerCircle,
    OuterCircle,
    Lens,
    Far,
}

/// One quadrature node: `int h(s) ds ~ sum weight h(node)`.
#[derive(Debug, Clone)]
struct Node {
    s: Complex64,
    weight: Complex64,
    /// `G(s) Delta(s)`.
    density: ComplexMatrix,
}

/// `R(z) = I + (1/2 pi i) int_Sigma G(s) Delta(s)/(s - z) ds`, discretized.
#[derive(Debug, Clone)]
pub struct SyntheticR {
    m: usize,
    n: f64,
    inner_radius: f64,
    outer_radius: f64,
    far_radius: f64,
    lens_angles: Vec<f64>,
    far_angles: Vec<f64>,
    nodes: Vec<Node>,
    pieces: Vec<(ContourPiece, std::ops::Range<usize>)>,
}

fn circle_nodes(radius: f64, count: usize) -> Result<Vec<(Complex64, Complex64)>> {
    let grid = CircleGrid::staggered(radius, count)?;
    let h = 2.0 * PI / count as f64;
    // ds = i s dtheta
    Ok(grid.nodes().into_iter().map(|s| (s, Complex64::new(0.0, h) * s)).collect())
}

pub fn build_synthetic_r(spec: &ContourSpec, n: f64) -> Result<SyntheticR> {
    spec.validate()?;
    let p = &spec.profile;
    let m = spec.u.size();
    let rho = p.inner_radius(n);
    let r = p.r;
    if !(rho < r) {
        return Err(Error::InvalidInput(format!("inner radius {rho} must be below r = {r}")));
    }
    let density = |s: Complex64, delta: ComplexMatrix| -> Result<ComplexMatrix> {
        match &spec.x {
            Some(x) => Ok(&(&ComplexMatrix::identity(m) + &x(s)?) * &delta),
            None => Ok(delta),
        }
    };
    let on = if spec.active { 1.0 } else { 0.0 };
    let mut nodes = Vec::new();
    let mut pieces = Vec::new();
    let mut push = |piece: ContourPiece, list: Vec<Node>, nodes: &mut Vec<Node>| {
        let start = nodes.len();
        nodes.extend(list);
        pieces.push((piece, start..nodes.len()));
    };

    let inner_size = on * n.powf(p.d - p.c);
    let list = circle_nodes(rho, spec.circle_nodes)?
        .into_iter()
        .map(|(s, w)| Ok(Node { s, weight: w, density: density(s, spec.u.scale(inner_size * 0.5 * (1.0 + s / rho)))? }))
        .collect::<Result<Vec<_>>>()?;
    push(ContourPiece::InnerCircle, list, &mut nodes);

    let mut lens = Vec::new();
    for &angle in &spec.lens_angles {
        let dir = Complex64::from_polar(1.0, angle);
        let rule = graded_segment(dir * rho, dir * r, spec.ray_panels, 0.5, spec.ray_order);
        for (s, w) in rule.nodes.into_iter().zip(rule.weights) {
            let size = on * (-spec.alpha * n * s.norm().powf(spec.beta)).exp();
            lens.push(Node { s, weight: w, density: density(s, spec.u.scale(Complex64::new(size, 0.0)))? });
        }
    }
    push(ContourPiece::Lens, lens, &mut nodes);

    let outer_size = on * n.powf(p.d - p.b);
    let list = circle_nodes(r, spec.circle_nodes)?
        .into_iter()
        .map(|(s, w)| Ok(Node { s, weight: w, density: density(s, spec.u.scale(outer_size * 0.5 * (1.0 + s / r)))? }))
        .collect::<Result<Vec<_>>>()?;
    push(ContourPiece::OuterCircle, list, &mut nodes);

    let far_radius = spec.far_factor * r;
    let mut far = Vec::new();
    for &angle in &spec.far_angles {
        let dir = Complex64::from_polar(1.0, angle);
        let rule = graded_segment(dir * r, dir * far_radius, 4, 1.0, spec.ray_order);
        for (s, w) in rule.nodes.into_iter().zip(rule.weights) {
            far.push(Node { s, weight: w, density: density(s, spec.u.scale(Complex64::new(on * n.powf(-p.b), 0.0)))? });
        }
    }
    push(ContourPiece::Far, far, &mut nodes);

    Ok(SyntheticR {
        m,
        n,
        inner_radius: rho,
        outer_radius: r,
        far_radius,
        lens_angles: spec.lens_angles.clone(),
        far_angles: spec.far_angles.clone(),
        nodes,
        pieces,
    })
}

fn near_segment(z: Complex64, angle: f64, from: f64, to: f64) -> bool {
    let dir = Complex64::from_polar(1.0, angle);
    let t = (z * dir.conj()).re.clamp(from, to);
    let dist = (z - dir * t).norm();
    dist < CONTOUR_GUARD * t.max(z.norm())
}

impl SyntheticR {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn node_count(&self, piece: ContourPiece) -> usize {
        self.pieces.iter().filter(|(p, _)| *p == piece).map(|(_, r)| r.len()).sum()
    }

    fn check(&self, z: Complex64) -> Result<()> {
        let mod_z = z.norm();
        let on_circle = |radius: f64| (mod_z - radius).abs() < CONTOUR_GUARD * radius;
        let on_lens = self.lens_angles.iter().any(|&a| near_segment(z, a, self.inner_radius, self.outer_radius));
        let on_far = self.far_angles.iter().any(|&a| near_segment(z, a, self.outer_radius, self.far_radius));
        if on_circle(self.inner_radius) || on_circle(self.outer_radius) || on_lens || on_far {
            return Err(Error::OnContour { z });
        }
        Ok(())
    }

    /// `R(z)`.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        self.check(z)?;
        let mut acc = ComplexMatrix::zeros(self.m);
        for node in &self.nodes {
            acc += &node.density.scale(node.weight / (node.s - z));
        }
        Ok(&ComplexMatrix::identity(self.m) + &acc.scale(1.0 / TWO_PI_I))
    }

    /// `R(x) - R(y)` through the product kernel
    /// `(x - y)/((s - x)(s - y))`, avoiding the cancellation of `R(x) - R(y)`.
    pub fn difference(&self, x: Complex64, y: Complex64) -> Result<ComplexMatrix> {
        self.check(x)?;
        self.check(y)?;
        let mut acc = ComplexMatrix::zeros(self.m);
        for node in &self.nodes {
            acc += &node.density.scale(node.weight / ((node.s - x) * (node.s - y)));
        }
        Ok(acc.scale((x - y) / TWO_PI_I))
    }

    /// Contribution of one contour class to `R(z) - I`.
    pub fn piece_eval(&self, piece: ContourPiece, z: Complex64) -> Result<ComplexMatrix> {
        self.check(z)?;
        let mut acc = ComplexMatrix::zeros(self.m);
        for (p, range) in &self.pieces {
            if *p == piece {
                for node in &self.nodes[range.clone()] {
                    acc += &node.density.scale(node.weight / (node.s - z));
                }
            }
        }
        Ok(acc.scale(1.0 / TWO_PI_I))
    }
}

/// Scalar handle of two real arguments.
pub type PairFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Ingredients of the scaled kernel `u0 Psi_+(y)^-1 Psi_+(x) v0 / (2 pi i (x - y))`.
#[derive(Clone)]
pub struct KernelScalingSpec {
    pub u0: Vec<Complex64>,
    pub v0: Vec<Complex64>,
    /// `f'(0)`; the scaled points are `x_n = x/(c_scale n^b)`.
    pub c_scale: Complex64,
    pub psi_plus: MatrixFn,
    /// `h_n(x, y)`; `None` means 1.
    pub hn: Option<PairFn>,
    /// When true, [`kernel_sandwich_check`] refuses profiles failing
    /// [`condition_validator`].
    pub enforce_condition: bool,
}

impl KernelScalingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c_scale == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("c_scale must be nonzero".into()));
        }
        if self.u0.len() != self.v0.len() {
            return Err(Error::SizeMismatch { expected: self.u0.len(), found: self.v0.len() });
        }
        Ok(())
    }

    /// `x/(c n^b)`.
    pub fn scaled_point(&self, x: f64, n: f64, profile: &ExponentProfile) -> Complex64 {
        Complex64::new(x, 0.0) / (self.c_scale * n.powf(profile.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub threshold: f64,
    pub c: f64,
    pub pass: bool,
}

/// `c >= min(3a/2 + d, 3a/2 + 2d - e)`.
pub fn condition_validator(profile: &ExponentProfile) -> ConditionCheck {
    let ExponentProfile { a, c, d, e, .. } = *profile;
    let threshold = (1.5 * a + d).min(1.5 * a + 2.0 * d - e);
    ConditionCheck { threshold, c, pass: le(threshold, c) }
}

/// Exponent of the R-difference bound, `max(-b, 3a/2 - b - c + d)`.
pub fn r_difference_exponent(profile: &ExponentProfile) -> f64 {
    let ExponentProfile { a, b, c, d, .. } = *profile;
    (-b).max(1.5 * a - b - c + d)
}

/// Exponent of the sandwich bound, `max(d, e) - b`, or with the extra
/// `3a/2 - b - c + 2d` term when the condition on `c` is waived.
pub fn sandwich_exponent(profile: &ExponentProfile, waived: bool) -> f64 {
    let ExponentProfile { a, b, c, d, e, .. } = *profile;
    let base = d.max(e) - b;
    if waived {
        base.max(1.5 * a - b - c + 2.0 * d)
    } else {
        base
    }
}

fn diagonal_guard(x: f64, y: f64) -> Result<()> {
    let gap = (x - y).abs();
    if gap < DIAGONAL_GUARD {
        return Err(Error::DiagonalBand { gap });
    }
    Ok(())
}

/// `|R(y_n)^-1 R(x_n) - I| / |x - y|`.
pub fn r_difference_check(r: &SyntheticR, kspec: &KernelScalingSpec, profile: &ExponentProfile, n: f64, x: f64, y: f64) -> Result<f64> {
    kspec.validate()?;
    diagonal_guard(x, y)?;
    let xn = kspec.scaled_point(x, n, profile);
    let yn = kspec.scaled_point(y, n, profile);
    let diff = r.difference(xn, yn)?;
    let dev = &mat_inv(&r.eval(yn)?)? * &diff;
    Ok(dev.norm() / (x - y).abs())
}

/// `|E_n^0(y_n)^-1 R(y_n)^-1 R(x_n) E_n^0(x_n) - I| / |x - y|`, computed as
/// `E0(y)^-1 [E0(x) - E0(y) + R(y)^-1 (R(x) - R(y)) E0(x)]`.
pub fn kernel_sandwich_check(
    e0: &InnerPrefactor,
    r: &SyntheticR,
    profile: &ExponentProfile,
    kspec: &KernelScalingSpec,
    n: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    kspec.validate()?;
    diagonal_guard(x, y)?;
    let cond = condition_validator(profile);
    if kspec.enforce_condition && !cond.pass {
        return Err(Error::ConditionViolated { threshold: cond.threshold, c: cond.c });
    }
    let xn = kspec.scaled_point(x, n, profile);
    let yn = kspec.scaled_point(y, n, profile);
    let ex = e0.eval(xn)?;
    let ey = e0.eval(yn)?;
    let r_part = &(&mat_inv(&r.eval(yn)?)? * &r.difference(xn, yn)?) * &ex;
    let inside = &(&ex - &ey) + &r_part;
    let dev = &mat_inv(&ey)? * &inside;
    Ok(dev.norm() / (x - y).abs())
}

/// `h_n(x, y) u0 Psi_+(y)^-1 S Psi_+(x) v0 / (2 pi i (x - y))` for a sandwich
/// matrix `S`; with `S = I` and `h_n = 1` this is the limiting kernel.
pub fn scaled_kernel(kspec: &KernelScalingSpec, sandwich: &ComplexMatrix, x: f64, y: f64) -> Result<Complex64> {
    kspec.validate()?;
    diagonal_guard(x, y)?;
    let px = (kspec.psi_plus)(Complex64::new(x, 0.0))?;
    let py_inv = mat_inv(&(kspec.psi_plus)(Complex64::new(y, 0.0))?)?;
    let m = px.size();
    if kspec.u0.len() != m || sandwich.size() != m {
        return Err(Error::SizeMismatch { expected: m, found: kspec.u0.len() });
    }
    let core = &(&py_inv * sandwich) * &px;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            acc += kspec.u0[i] * core.get(i, j) * kspec.v0[j];
        }
    }
    let h = kspec.hn.as_ref().map_or(Complex64::new(1.0, 0.0), |h| h(x, y));
    Ok(h * acc / (TWO_PI_I * (x - y)))
}

/// `u0 Psi_+(y)^-1 Psi_+(x) v0 / (2 pi i (x - y))`.
pub fn limiting_kernel(kspec: &KernelScalingSpec, x: f64, y: f64) -> Result<Complex64> {
    let m = kspec.u0.len();
    let plain = KernelScalingSpec { hn: None, ..kspec.clone() };
    scaled_kernel(&plain, &ComplexMatrix::identity(m), x, y)
}

/// Near-origin measurements of `E_n^0` on the disc `|z| <= rho n^-e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearOriginReport {
    pub n: f64,
    /// `sup |E(0)^-1 E_n^0(z) - I - L(z)|`, with `L` the supplied linear
    /// part (zero when none is given).
    pub deviation: f64,
    /// `sup_{z != w} |E_n^0(z)^-1 E_n^0(w) - I| / |z - w|`.
    pub lipschitz: f64,
    pub disc_radius: f64,
}

/// Probe points: the origin plus rings at `1/4, 1/2, 3/4, 1` of the disc
/// radius, 16 points each, rotated off the axes.
pub fn disc_points(radius: f64) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for ring in 1..=4 {
        let rr = radius * ring as f64 / 4.0;
        for k in 0..16 {
            let theta = (k as f64 + 0.5) * 2.0 * PI / 16.0 + 0.1 * ring as f64;
            pts.push(Complex64::from_polar(rr, theta));
        }
    }
    pts
}

/// Measures `E_n^0` against `E(0)` near the origin. `linear`, when given,
/// is subtracted before taking the norm (for a family whose `E` has a
/// known linear part, this isolates the `O(n^(e-b))` correction).
pub fn near_origin_probe(
    e0: &InnerPrefactor,
    e: &SampledMatrixFunction,
    n: f64,
    profile: &ExponentProfile,
    rho: f64,
    linear: Option<&dyn Fn(Complex64) -> ComplexMatrix>,
) -> Result<NearOriginReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!("rho = {rho} must lie in (0, 1)")));
    }
    let disc_radius = rho * n.powf(-profile.e);
    let zero = Complex64::new(0.0, 0.0);
    let e_at_zero = match e.evaluator() {
        Some(_) => e.eval(zero)?,
        None => crate::cauchy::regular_part_eval(e, &crate::cauchy::PrincipalPart::zero(e.m()), zero)?,
    };
    let e_zero_inv = mat_inv(&e_at_zero)?;
    let pts = disc_points(disc_radius);
    let values = pts.iter().map(|&z| e0.eval(z)).collect::<Result<Vec<_>>>()?;
    let inverses = values.iter().map(mat_inv).collect::<Result<Vec<_>>>()?;
    let id = ComplexMatrix::identity(e.m());
    let mut deviation = 0.0_f64;
    for (z, v) in pts.iter().zip(&values) {
        let mut dev = &(&e_zero_inv * v) - &id;
        if let Some(l) = linear {
            dev = &dev - &l(*z);
        }
        deviation = deviation.max(dev.norm());
    }
    let mut lipschitz = 0.0_f64;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j {
                let q = (&inverses[i] * &values[j]).distance_to_identity() / (pts[i] - pts[j]).norm();
                lipschitz = lipschitz.max(q);
            }
        }
    }
    Ok(NearOriginReport { n, deviation, lipschitz, disc_radius })
}

/// The 5x5 grid of `[-1, 1]^2` without its diagonal.
pub fn default_pairs() -> Vec<(f64, f64)> {
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut pairs = Vec::new();
    for &x in &xs {
        for &y in &xs {
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    pairs
}

/// All near-origin and kernel measurements of a synthetic family at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: f64,
    /// `sup |E(0)^-1 E_n^0(z) - I - n^e z A|` on `|z| <= rho n^-e`.
    pub deviation: f64,
    pub lipschitz: f64,
    /// Sandwich deviation over `|x - y|`, one entry per pair.
    pub sandwich: Vec<f64>,
    /// `|R(y_n)^-1 R(x_n) - I| / |x - y|`, one entry per pair.
    pub r_difference: Vec<f64>,
    /// `sup |R(x_n) - I|` over the pair abscissae.
    pub r_minus_identity: f64,
}

/// Resolution knobs for [`scaling_at`]; doubling all of them is the grid
/// refinement used by the hygiene checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingOptions {
    pub quad_nodes: usize,
    pub circle_nodes: usize,
    pub ray_panels: usize,
    pub rho: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions { quad_nodes: 256, circle_nodes: 256, ray_panels: 24, rho: 0.9 }
    }
}

impl ScalingOptions {
    pub fn doubled(&self) -> Self {
        ScalingOptions {
            quad_nodes: 2 * self.quad_nodes,
            circle_nodes: 2 * self.circle_nodes,
            ray_panels: 2 * self.ray_panels,
            rho: self.rho,
        }
    }
}

pub fn scaling_at(
    fam: &SyntheticFamily,
    spec: &ContourSpec,
    kspec: &KernelScalingSpec,
    pairs: &[(f64, f64)],
    n: f64,
    opts: &ScalingOptions,
) -> Result<ScalingPoint> {
    let p = fam.profile;
    let (e0, _, _) = synthetic_prefactors(fam, n, opts.quad_nodes)?;
    let a = fam.a_mat.clone();
    let linear = move |z: Complex64| a.scale(z * n.powf(p.e));
    let near = near_origin_probe(&e0, e0.e(), n, &p, opts.rho, Some(&linear))?;
    let spec = ContourSpec { circle_nodes: opts.circle_nodes, ray_panels: opts.ray_panels, ..spec.clone() };
    let r = build_synthetic_r(&spec, n)?;
    let sandwich = pairs.iter().map(|&(x, y)| kernel_sandwich_check(&e0, &r, &p, kspec, n, x, y)).collect::<Result<Vec<_>>>()?;
    let r_difference = pairs.iter().map(|&(x, y)| r_difference_check(&r, kspec, &p, n, x, y)).collect::<Result<Vec<_>>>()?;
    let mut r_minus_identity = 0.0_f64;
    for &(x, _) in pairs {
        let v = r.eval(kspec.scaled_point(x, n, &p))?;
        r_minus_identity = r_minus_identity.max(v.distance_to_identity());
    }
    Ok(ScalingPoint { n, deviation: near.deviation, lipschitz: near.lipschitz, sandwich, r_difference, r_minus_identity })
}

/// Fitted slopes of a scaling sweep and their targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub n_values: Vec<f64>,
    pub deviation: FloorFit,
    pub lipschitz: FloorFit,
    /// Largest per-pair slope, `None` if some pair could not be fitted.
    pub sandwich_worst: Option<f64>,
    pub r_difference_worst: Option<f64>,
    pub r_minus_identity: FloorFit,
    /// `e - b`, `e`, `max(d, e) - b`, `max(-b, 3a/2 - b - c + d)`, `max(a + d - c, d - b)`.
    pub targets: ScalingTargets,
    pub tol: f64,
    pub pass_deviation: bool,
    pub pass_lipschitz: bool,
    pub pass_sandwich: bool,
    pub pass_r_difference: bool,
    pub pass_r_minus_identity: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingTargets {
    pub deviation: f64,
    pub lipschitz: f64,
    pub sandwich: f64,
    pub r_difference: f64,
    pub r_minus_identity: f64,
}

impl ScalingTargets {
    pub fn for_profile(p: &ExponentProfile, waived: bool) -> Self {
        ScalingTargets {
            deviation: p.e - p.b,
            lipschitz: p.e,
            sandwich: sandwich_exponent(p, waived),
            r_difference: r_difference_exponent(p),
            r_minus_identity: (p.a + p.d - p.c).max(p.d - p.b),
        }
    }
}

/// Worst per-series slope; series entirely at floor count as passing.
fn worst_slope(ns: &[f64], series: &[Vec<f64>], target: f64, tol: f64) -> (Option<f64>, bool) {
    let mut worst: Option<f64> = None;
    let mut pass = true;
    for s in series {
        let fit = fit_above_floor(ns, s);
        pass &= fit.passes(target, tol, ns.len());
        match (fit.slope, fit.all_at_floor(ns.len())) {
            (Some(v), _) => worst = Some(worst.map_or(v, |w: f64| w.max(v))),
            (None, true) => {}
            (None, false) => return (None, false),
        }
    }
    (worst, pass)
}

impl ScalingReport {
    pub fn from_points(points: &[ScalingPoint], profile: &ExponentProfile, waived: bool, tol: f64) -> Self {
        let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
        let total = ns.len();
        let targets = ScalingTargets::for_profile(profile, waived);
        let deviation = fit_above_floor(&ns, &points.iter().map(|p| p.deviation).collect::<Vec<_>>());
        let lipschitz = fit_above_floor(&ns, &points.iter().map(|p| p.lipschitz).collect::<Vec<_>>());
        let r_minus_identity = fit_above_floor(&ns, &points.iter().map(|p| p.r_minus_identity).collect::<Vec<_>>());
        let pairs = points.first().map_or(0, |p| p.sandwich.len());
        let column = |f: fn(&ScalingPoint) -> &Vec<f64>| -> Vec<Vec<f64>> {
            (0..pairs).map(|i| points.iter().map(|p| f(p)[i]).collect()).collect()
        };
        let (sandwich_worst, pass_sandwich) = worst_slope(&ns, &column(|p| &p.sandwich), targets.sandwich, tol);
        let (r_difference_worst, pass_r_difference) = worst_slope(&ns, &column(|p| &p.r_difference), targets.r_difference, tol);
        let pass_deviation = deviation.passes(targets.deviation, tol, total);
        let pass_lipschitz = lipschitz.slope.is_some_and(|s| (s - targets.lipschitz).abs() <= tol);
        let pass_r_minus_identity = r_minus_identity.passes(targets.r_minus_identity, tol, total);
        let pass = total > 0
            && pass_deviation
            && pass_lipschitz
            && pass_sandwich
            && pass_r_difference
            && pass_r_minus_identity;
        ScalingReport {
            n_values: ns,
            deviation,
            lipschitz,
            sandwich_worst,
            r_difference_worst,
            r_minus_identity,
            targets,
            tol,
            pass_deviation,
            pass_lipschitz,
            pass_sandwich,
            pass_r_difference,
            pass_r_minus_identity,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingOutcome {
    pub points: Vec<ScalingPoint>,
    pub report: ScalingReport,
}

/// [`scaling_at`] over a sweep, in parallel over `n`.
pub fn scaling_sweep(
    fam: &SyntheticFamily,
    spec: &ContourSpec,
    kspec: &KernelScalingSpec,
    n_values: &[f64],
    opts: &ScalingOptions,
    tol: f64,
) -> Result<ScalingOutcome> {
    let pairs = default_pairs();
    let points = n_values
        .par_iter()
        .map(|&n| scaling_at(fam, spec, kspec, &pairs, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let report = ScalingReport::from_points(&points, &fam.profile, !kspec.enforce_condition, tol);
    Ok(ScalingOutcome { points, report })
}

/// First-coordinate projections `u0 = v0 = e_1`, `Psi_+ = I`, `c = 1`.
pub fn unit_kernel_spec(m: usize) -> KernelScalingSpec {
    let e1: Vec<Complex64> = (0..m).map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect();
    KernelScalingSpec {
        u0: e1.clone(),
        v0: e1,
        c_scale: Complex64::new(1.0, 0.0),
        psi_plus: crate::sampled::constant_fn(ComplexMatrix::identity(m)),
        hn: None,
        enforce_condition: true,
    }
}
