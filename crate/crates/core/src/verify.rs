//! Matching verification on synthetic families with known exponents.
//!
//! The synthetic family uses `E(z) = I + n^e z A` with `A^2 = 0`, so that
//! `E^-1(z) E(w) = I + n^e (w - z) A` holds exactly, `N(z) = I + z N_B`,
//! and `P = (I + C/(n^b z) + n^-c G(z)) E^-1 N`, which satisfies the
//! almost-matching hypothesis with remainder exactly `n^-c G`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::matrix::{mat_inv, ComplexMatrix};
use crate::pi::{build_f, pi_iterate};
use crate::prefactor::{build_prefactors, plan, trivial_prefactors, InnerPrefactor, OuterPrefactor};
use crate::profile::ExponentProfile;
use crate::sampled::{constant_fn, matrix_fn, sup_norm_on_grid, MatrixFn, SampledMatrixFunction};

/// Residuals below this are reported as at floor and not fitted.
pub const RESIDUAL_FLOOR: f64 = 1e-12;
/// Default slope tolerance.
pub const DEFAULT_TOL: f64 = 0.3;

#[derive(Clone)]
pub struct SyntheticFamily {
    pub m: usize,
    pub profile: ExponentProfile,
    /// Nilpotent, `A^2 = 0`.
    pub a_mat: ComplexMatrix,
    pub c0: ComplexMatrix,
    /// Remainder shape, bounded and analytic.
    pub g: MatrixFn,
    pub nb: ComplexMatrix,
}

impl std::fmt::Debug for SyntheticFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SyntheticFamily")
            .field("m", &self.m)
            .field("profile", &self.profile)
            .field("a_mat", &self.a_mat)
            .field("c0", &self.c0)
            .field("nb", &self.nb)
            .finish()
    }
}

impl SyntheticFamily {
    /// `m = 3`, `(a, b, c, d, e) = (1, 3, 4, 2, 2)`, `A = E_12`, `C0 = E_21`,
    /// `G = I`, `N_B = E_13`.
    pub fn reference() -> Self {
        let profile = ExponentProfile::new(1.0, 3.0, 4.0, 2.0, 2.0, 0, 1.0).expect("valid profile");
        Self::with_units(profile)
    }

    /// The reference matrices with `(a, b, c, d, e) = (1, 3, 3/2, 1, 1)`,
    /// where `c <= b - a` and no double matching is needed.
    pub fn trivial_example() -> Self {
        let profile = ExponentProfile::new(1.0, 3.0, 1.5, 1.0, 1.0, 0, 1.0).expect("valid profile");
        Self::with_units(profile)
    }

    /// The reference matrices `A = E_12`, `C0 = E_21`, `G = I`, `N_B = E_13`
    /// with an arbitrary profile.
    pub fn with_units(profile: ExponentProfile) -> Self {
        SyntheticFamily {
            m: 3,
            profile,
            a_mat: ComplexMatrix::unit(3, 0, 1),
            c0: ComplexMatrix::unit(3, 1, 0),
            g: constant_fn(ComplexMatrix::identity(3)),
            nb: ComplexMatrix::unit(3, 0, 2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        for mat in [&self.a_mat, &self.c0, &self.nb] {
            if mat.size() != self.m {
                return Err(Error::SizeMismatch { expected: self.m, found: mat.size() });
            }
        }
        if (&self.a_mat * &self.a_mat).norm() != 0.0 {
            return Err(Error::InvalidInput("A must square to zero".into()));
        }
        let ExponentProfile { a, d, e, .. } = self.profile;
        if d / 2.0 < e - a - crate::profile::EXPONENT_TOL {
            return Err(Error::InvalidProfile(format!("d/2 >= e - a violated (d = {d}, e = {e}, a = {a})")));
        }
        Ok(())
    }

    pub fn e_at(&self, n: f64, z: Complex64) -> ComplexMatrix {
        &ComplexMatrix::identity(self.m) + &self.a_mat.scale(n.powf(self.profile.e) * z)
    }

    pub fn e_inv_at(&self, n: f64, z: Complex64) -> ComplexMatrix {
        &ComplexMatrix::identity(self.m) - &self.a_mat.scale(n.powf(self.profile.e) * z)
    }

    pub fn n_at(&self, z: Complex64) -> ComplexMatrix {
        &ComplexMatrix::identity(self.m) + &self.nb.scale(z)
    }

    /// `C/(n^b z) + n^-c G(z)`: the deviation of `P N^-1 E` from `I`.
    pub fn remainder_at(&self, n: f64, z: Complex64) -> Result<ComplexMatrix> {
        let p = &self.profile;
        let g = (self.g)(z)?;
        Ok(&self.c0.scale(1.0 / (n.powf(p.b) * z)) + &g.scale(Complex64::new(n.powf(-p.c), 0.0)))
    }

    pub fn ring_p_at(&self, n: f64, z: Complex64) -> Result<ComplexMatrix> {
        let inner = &ComplexMatrix::identity(self.m) + &self.remainder_at(n, z)?;
        Ok(&(&inner * &self.e_inv_at(n, z)) * &self.n_at(z))
    }

    /// `sup |E (C/(n^b z) + n^-c G) E^-1|` over `grid`: on the trivial
    /// route this is the inner matching residual in closed form.
    pub fn conjugated_remainder(&self, n: f64, grid: &CircleGrid) -> Result<f64> {
        grid.nodes().into_iter().try_fold(0.0_f64, |acc, z| {
            let conj = &(&self.e_at(n, z) * &self.remainder_at(n, z)?) * &self.e_inv_at(n, z);
            Ok(acc.max(conj.norm()))
        })
    }
}

/// `P`, `N`, `E`, `C` of a synthetic family on one grid, with evaluators.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub ring_p: SampledMatrixFunction,
    pub n_fn: SampledMatrixFunction,
    pub e: SampledMatrixFunction,
    pub c: SampledMatrixFunction,
}

/// Samples the family at scale `n` on the staggered circle `|z| = n^-a`
/// with `nodes` points.
pub fn make_synthetic(fam: &SyntheticFamily, n: f64, nodes: usize) -> Result<SyntheticInstance> {
    fam.validate()?;
    let grid = CircleGrid::staggered(fam.profile.inner_radius(n), nodes)?;
    let m = fam.m;
    let f1 = fam.clone();
    let ring_p = SampledMatrixFunction::from_fn(grid, m, matrix_fn(move |z| f1.ring_p_at(n, z)), 1)?;
    let f2 = fam.clone();
    let n_fn = SampledMatrixFunction::from_fn(grid, m, matrix_fn(move |z| Ok(f2.n_at(z))), 0)?;
    let f3 = fam.clone();
    let e = SampledMatrixFunction::from_fn(grid, m, matrix_fn(move |z| Ok(f3.e_at(n, z))), 0)?;
    let c = SampledMatrixFunction::from_fn(grid, m, constant_fn(fam.c0.clone()), 0)?;
    Ok(SyntheticInstance { ring_p, n_fn, e, c })
}

/// `sup_nodes |E_n^0 P N^-1 E_n^inf^-1 - I|` on the grid of `ring_p`.
pub fn matching_residual_inner(
    e0: &InnerPrefactor,
    einf: &OuterPrefactor,
    ring_p: &SampledMatrixFunction,
    n_fn: &SampledMatrixFunction,
    n: f64,
    profile: &ExponentProfile,
) -> Result<f64> {
    let grid = ring_p.grid();
    if n_fn.grid() != grid {
        return Err(Error::InvalidGrid("P and N must share a grid".into()));
    }
    let expected = profile.inner_radius(n);
    if (grid.radius() - expected).abs() > 1e-12 * expected {
        return Err(Error::InvalidGrid(format!("grid radius {} is not n^-a = {expected}", grid.radius())));
    }
    let mut worst = 0.0_f64;
    for k in 0..grid.len() {
        let z = grid.node(k);
        let lhs = &(&(&e0.eval(z)? * ring_p.value(k)) * &mat_inv(n_fn.value(k))?) * &einf.eval_inverse(z);
        worst = worst.max(lhs.distance_to_identity());
    }
    Ok(worst)
}

/// `sup_nodes |E_n^inf - I|` on the circle `|z| = r`.
pub fn matching_residual_outer(einf: &OuterPrefactor, r: f64, grid: &CircleGrid) -> Result<f64> {
    if (grid.radius() - r).abs() > 1e-12 * r {
        return Err(Error::InvalidGrid(format!("grid radius {} is not r = {r}", grid.radius())));
    }
    grid.nodes()
        .into_iter()
        .try_fold(0.0_f64, |acc, z| Ok(acc.max(crate::prefactor::eval_outer(einf, z)?.distance_to_identity())))
}

/// Least-squares slope of `log residual` against `log n` over the upper
/// half of the points.
pub fn rate_fit(n_values: &[f64], residuals: &[f64]) -> Result<f64> {
    if n_values.len() != residuals.len() {
        return Err(Error::DegenerateData(format!("{} n-values, {} residuals", n_values.len(), residuals.len())));
    }
    if n_values.len() < 4 {
        return Err(Error::DegenerateData(format!("{} points, need at least 4", n_values.len())));
    }
    if let Some(bad) = residuals.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::DegenerateData(format!("residual {bad} is below floor")));
    }
    if n_values.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::DegenerateData("n-values must be positive".into()));
    }
    let start = n_values.len() / 2;
    let xs: Vec<f64> = n_values[start..].iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = residuals[start..].iter().map(|r| r.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all n-values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// A fit that first drops residuals below [`RESIDUAL_FLOOR`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorFit {
    /// `None` when fewer than 4 points remain.
    pub slope: Option<f64>,
    /// n-values whose residual was at floor.
    pub excluded: Vec<f64>,
}

impl FloorFit {
    /// Every point at floor: consistent with any decay rate.
    pub fn all_at_floor(&self, total: usize) -> bool {
        self.excluded.len() == total
    }

    pub fn passes(&self, target: f64, tol: f64, total: usize) -> bool {
        match self.slope {
            Some(s) => s <= target + tol,
            None => self.all_at_floor(total),
        }
    }
}

pub fn fit_above_floor(n_values: &[f64], residuals: &[f64]) -> FloorFit {
    let mut ns = Vec::new();
    let mut rs = Vec::new();
    let mut excluded = Vec::new();
    for (&n, &r) in n_values.iter().zip(residuals) {
        if r < RESIDUAL_FLOOR {
            excluded.push(n);
        } else {
            ns.push(n);
            rs.push(r);
        }
    }
    FloorFit { slope: rate_fit(&ns, &rs).ok(), excluded }
}

/// Geometric sweep `n = 2^k`, `k = min_exp..=max_exp`.
pub fn geometric_sweep(min_exp: i32, max_exp: i32) -> Vec<f64> {
    (min_exp..=max_exp).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchOptions {
    /// Starting node count for the quadrature (auto-doubled as needed).
    pub quad_nodes: usize,
    /// Nodes at which the inner residual is evaluated.
    pub eval_nodes: usize,
    /// Nodes at which the outer residual is evaluated.
    pub outer_nodes: usize,
    pub tol: f64,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { quad_nodes: 256, eval_nodes: 256, outer_nodes: 256, tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchPoint {
    pub n: f64,
    pub radius_inner: f64,
    pub residual_inner: f64,
    pub residual_outer: f64,
    pub k: Option<usize>,
    /// Measured degree of `E_n^inf^-1`.
    pub degree: usize,
    pub degree_bound: usize,
    /// Quadrature nodes actually used by the iterate chain.
    pub quad_nodes_used: usize,
    /// Sup-norm of `pi^j F` on the inner circle, `j = 0..=K`.
    pub iterate_norms: Vec<f64>,
}

/// Prefactors for a synthetic family at one `n`.
pub fn synthetic_prefactors(fam: &SyntheticFamily, n: f64, quad_nodes: usize) -> Result<(InnerPrefactor, OuterPrefactor, Vec<f64>)> {
    let plan = plan(&fam.profile)?;
    let inst = make_synthetic(fam, n, quad_nodes)?;
    if plan.trivial {
        let (inner, outer) = trivial_prefactors(&inst.e);
        return Ok((inner, outer, Vec::new()));
    }
    let f = build_f(&inst.e, &inst.c, n, &fam.profile)?;
    let chain = pi_iterate(&f, plan.k.expect("nontrivial plan has a depth"))?;
    let norms = chain.iter().map(|it| sup_norm_on_grid(&it.samples)).collect();
    let (inner, outer) = build_prefactors(&chain, &inst.e, &plan)?;
    Ok((inner, outer, norms))
}

/// Builds the prefactors at one `n` and measures both residuals.
pub fn match_at(fam: &SyntheticFamily, n: f64, opts: &MatchOptions) -> Result<MatchPoint> {
    let plan = plan(&fam.profile)?;
    let (inner, outer, iterate_norms) = synthetic_prefactors(fam, n, opts.quad_nodes)?;
    let eval = make_synthetic(fam, n, opts.eval_nodes)?;
    let residual_inner = matching_residual_inner(&inner, &outer, &eval.ring_p, &eval.n_fn, n, &fam.profile)?;
    let r = fam.profile.r;
    let residual_outer = matching_residual_outer(&outer, r, &CircleGrid::staggered(r, opts.outer_nodes)?)?;
    Ok(MatchPoint {
        n,
        radius_inner: fam.profile.inner_radius(n),
        residual_inner,
        residual_outer,
        k: plan.k,
        degree: outer.deg,
        degree_bound: plan.degree_bound(&fam.profile),
        quad_nodes_used: inner.grid().len(),
        iterate_norms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub n_values: Vec<f64>,
    pub inner_residuals: Vec<f64>,
    pub outer_residuals: Vec<f64>,
    pub slope_inner: Option<f64>,
    pub slope_outer: Option<f64>,
    pub predicted_inner: f64,
    pub predicted_outer: f64,
    pub tol: f64,
    pub pass: bool,
    /// n-values excluded from either fit because the residual was at floor.
    pub floor_excluded_points: Vec<f64>,
}

impl RateReport {
    pub fn from_points(points: &[MatchPoint], profile: &ExponentProfile, tol: f64) -> Self {
        let n_values: Vec<f64> = points.iter().map(|p| p.n).collect();
        let inner: Vec<f64> = points.iter().map(|p| p.residual_inner).collect();
        let outer: Vec<f64> = points.iter().map(|p| p.residual_outer).collect();
        let fit_in = fit_above_floor(&n_values, &inner);
        let fit_out = fit_above_floor(&n_values, &outer);
        let total = n_values.len();
        let pass = total > 0
            && fit_in.passes(profile.predicted_inner(), tol, total)
            && fit_out.passes(profile.predicted_outer(), tol, total);
        let mut excluded: Vec<f64> = fit_in.excluded.iter().chain(&fit_out.excluded).copied().collect();
        excluded.sort_by(f64::total_cmp);
        excluded.dedup();
        RateReport {
            n_values,
            inner_residuals: inner,
            outer_residuals: outer,
            slope_inner: fit_in.slope,
            slope_outer: fit_out.slope,
            predicted_inner: profile.predicted_inner(),
            predicted_outer: profile.predicted_outer(),
            tol,
            pass,
            floor_excluded_points: excluded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub points: Vec<MatchPoint>,
    pub report: RateReport,
}

/// Runs [`match_at`] for every `n` (in parallel) and fits the rates.
pub fn match_sweep(fam: &SyntheticFamily, n_values: &[f64], opts: &MatchOptions) -> Result<SweepOutcome> {
    let points = n_values.par_iter().map(|&n| match_at(fam, n, opts)).collect::<Result<Vec<_>>>()?;
    let report = RateReport::from_points(&points, &fam.profile, opts.tol);
    Ok(SweepOutcome { points, report })
}

/// Growth of `E`, `E^-1`, the Lipschitz quotient of `E^-1 E`, and `C`
/// on one circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub n: f64,
    pub e_sup: f64,
    pub e_inv_sup: f64,
    /// `sup_{z != w} |E(z)^-1 E(w) - I| / |z - w|` over node pairs.
    pub lipschitz: f64,
    pub c_sup: f64,
}

pub fn hypothesis_probe(
    e: &SampledMatrixFunction,
    c: &SampledMatrixFunction,
    n: f64,
    profile: &ExponentProfile,
) -> Result<HypothesisReport> {
    let grid = e.grid();
    if c.grid() != grid {
        return Err(Error::InvalidGrid("E and C must share a grid".into()));
    }
    let expected = profile.inner_radius(n);
    if (grid.radius() - expected).abs() > 1e-12 * expected {
        return Err(Error::InvalidGrid(format!("grid radius {} is not n^-a = {expected}", grid.radius())));
    }
    let inverses = e.values().iter().map(mat_inv).collect::<Result<Vec<_>>>()?;
    let nodes = grid.nodes();
    let lipschitz = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0_f64;
            for j in 0..nodes.len() {
                if i != j {
                    let q = (&inverses[i] * e.value(j)).distance_to_identity() / (nodes[i] - nodes[j]).norm();
                    worst = worst.max(q);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(HypothesisReport {
        n,
        e_sup: sup_norm_on_grid(e),
        e_inv_sup: inverses.iter().map(ComplexMatrix::norm).fold(0.0, f64::max),
        lipschitz,
        c_sup: sup_norm_on_grid(c),
    })
}

/// Fitted growth slopes of a probe sweep against `(d/2, d/2, e, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSlopes {
    pub e: FloorFit,
    pub e_inv: FloorFit,
    pub lipschitz: FloorFit,
    pub c: FloorFit,
    pub targets: [f64; 4],
    /// Names of the metrics whose slope exceeds its target by more than `tol`.
    pub violations: Vec<String>,
}

pub fn probe_slopes(reports: &[HypothesisReport], profile: &ExponentProfile, tol: f64) -> HypothesisSlopes {
    let ns: Vec<f64> = reports.iter().map(|r| r.n).collect();
    let series = |f: fn(&HypothesisReport) -> f64| -> Vec<f64> { reports.iter().map(f).collect() };
    let e = fit_above_floor(&ns, &series(|r| r.e_sup));
    let e_inv = fit_above_floor(&ns, &series(|r| r.e_inv_sup));
    let lipschitz = fit_above_floor(&ns, &series(|r| r.lipschitz));
    let c = fit_above_floor(&ns, &series(|r| r.c_sup));
    let targets = [profile.d / 2.0, profile.d / 2.0, profile.e, 0.0];
    let mut violations = Vec::new();
    for (name, fit, target) in [("E", &e, targets[0]), ("E^-1", &e_inv, targets[1]), ("lipschitz", &lipschitz, targets[2]), ("C", &c, targets[3])] {
        if !fit.passes(target, tol, ns.len()) {
            violations.push(name.to_string());
        }
    }
    HypothesisSlopes { e, e_inv, lipschitz, c, targets, violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaperProfile {
    pub name: &'static str,
    pub profile: ExponentProfile,
    pub expected_k: usize,
}

/// Exponent profiles of three published matching problems: the
/// Muttalib-Borodin ensemble with parameter 1/2 (MB1/2), the Cauchy-Laguerre
/// three-chain (CL3), and non-intersecting Bessel paths (NIBP).
pub fn paper_profiles() -> Vec<PaperProfile> {
    let p = |a, b, c, d, e| ExponentProfile::new(a, b, c, d, e, 0, 1.0).expect("published profile is valid");
    vec![
        PaperProfile { name: "MB1/2", profile: p(1.5, 3.0, 3.0, 2.0, 2.5), expected_k: 1 },
        PaperProfile { name: "CL3", profile: p(4.0 / 3.0, 4.0, 16.0 / 3.0, 3.0, 10.0 / 3.0), expected_k: 2 },
        PaperProfile { name: "NIBP", profile: p(0.5, 1.5, 2.0, 1.0, 1.0), expected_k: 1 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_examples() {
        let ns = geometric_sweep(3, 10);
        let pure: Vec<f64> = ns.iter().map(|n| n.powi(-2)).collect();
        assert!((rate_fit(&ns, &pure).unwrap() + 2.0).abs() < 1e-6);
        let scaled: Vec<f64> = ns.iter().map(|n| 5.0 * n.powf(-0.5)).collect();
        assert!((rate_fit(&ns, &scaled).unwrap() + 0.5).abs() < 1e-6);
        let mixed: Vec<f64> = ns.iter().map(|n| n.powi(-2) + n.powi(-3)).collect();
        let s = rate_fit(&ns, &mixed).unwrap();
        assert!((-2.05..=-1.95).contains(&s));
    }

    #[test]
    fn rate_fit_rejects_degenerate_data() {
        let ns = geometric_sweep(3, 6);
        assert!(matches!(rate_fit(&ns, &[1.0, 0.5, 0.0, 0.1]), Err(Error::DegenerateData(_))));
        assert!(matches!(rate_fit(&ns[..3], &[1.0, 0.5, 0.2]), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn floor_points_are_excluded() {
        let ns = geometric_sweep(1, 10);
        let res: Vec<f64> = ns.iter().map(|n| 1e-3 * n.powi(-4)).collect();
        let fit = fit_above_floor(&ns, &res);
        assert!(!fit.excluded.is_empty());
        assert!((fit.slope.unwrap() + 4.0).abs() < 1e-9);
        let zeros = vec![0.0; ns.len()];
        let fit = fit_above_floor(&ns, &zeros);
        assert!(fit.slope.is_none() && fit.all_at_floor(ns.len()));
        assert!(fit.passes(-1.0, 0.3, ns.len()));
    }

    #[test]
    fn paper_profile_depths() {
        for fixture in paper_profiles() {
            let plan = plan(&fixture.profile).unwrap();
            assert!(fixture.profile.nontrivial());
            assert_eq!(plan.k, Some(fixture.expected_k), "{}", fixture.name);
        }
    }

    #[test]
    fn reference_family_is_valid() {
        let fam = SyntheticFamily::reference();
        fam.validate().unwrap();
        let z = Complex64::new(0.01, 0.02);
        let w = Complex64::new(-0.03, 0.005);
        let n = 16.0;
        // E^-1(z) E(w) = I + n^e (w - z) A
        let lhs = &fam.e_inv_at(n, z) * &fam.e_at(n, w);
        let rhs = &ComplexMatrix::identity(3) + &fam.a_mat.scale(n * n * (w - z));
        assert!((&lhs - &rhs).norm() < 1e-15);
    }

    #[test]
    fn family_invariant_d_over_two() {
        let mut fam = SyntheticFamily::reference();
        fam.profile.d = 1.0;
        assert!(matches!(fam.validate(), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn zero_remainder_family_gives_e_inverse_n() {
        let mut fam = SyntheticFamily::reference();
        fam.c0 = ComplexMatrix::zeros(3);
        fam.g = constant_fn(ComplexMatrix::zeros(3));
        let inst = make_synthetic(&fam, 8.0, 32).unwrap();
        for k in 0..32 {
            let z = inst.ring_p.grid().node(k);
            let want = &fam.e_inv_at(8.0, z) * &fam.n_at(z);
            assert!((inst.ring_p.value(k) - &want).norm() < 1e-15);
        }
        let pt = match_at(&fam, 8.0, &MatchOptions::default()).unwrap();
        assert!(pt.residual_inner < 1e-11);
        assert!(pt.residual_outer < 1e-15);
    }

    #[test]
    fn expansion_residual_of_family_is_the_remainder() {
        let fam = SyntheticFamily::reference();
        let n = 8.0;
        let inst = make_synthetic(&fam, n, 64).unwrap();
        let res = crate::parametrix::expansion_residual(&inst.ring_p, &inst.n_fn, &inst.e, &inst.c, n, &fam.profile).unwrap();
        assert!((res - n.powf(-4.0)).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_probe_on_identity_and_scaled_pole() {
        let p = ExponentProfile::new(1.0, 3.0, 4.0, 2.0, 2.0, 0, 1.0).unwrap();
        let reports: Vec<HypothesisReport> = geometric_sweep(3, 8)
            .into_iter()
            .map(|n| {
                let grid = CircleGrid::staggered(1.0 / n, 32).unwrap();
                let e = SampledMatrixFunction::from_fn(grid, 2, constant_fn(ComplexMatrix::identity(2)), 0).unwrap();
                let c = SampledMatrixFunction::from_fn(grid, 2, matrix_fn(|z| Ok(ComplexMatrix::scalar(2, 1.0 / z))), 1).unwrap();
                hypothesis_probe(&e, &c, n, &p).unwrap()
            })
            .collect();
        assert!(reports.iter().all(|r| r.e_sup == 1.0 && r.e_inv_sup == 1.0 && r.lipschitz == 0.0));
        let slopes = probe_slopes(&reports, &p, 0.2);
        assert!((slopes.c.slope.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(slopes.violations, vec!["C".to_string()]);
    }
}
