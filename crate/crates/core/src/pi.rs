//! The operator `pi F = -F^+ F - F F^- + F^+ F^- + F^+ F F^-` and its
//! iterates, computed from pointwise samples plus one fresh principal-part
//! extraction per level.

use num_complex::Complex64;

use crate::cauchy::{aliasing_check, principal_part, resolve, PrincipalPart, ALIASING_TOL, MAX_SAMPLES};
use crate::error::{Error, Result};
use crate::matrix::{mat_inv, ComplexMatrix};
use crate::profile::ExponentProfile;
use crate::sampled::{matrix_fn, MatrixFn, SampledMatrixFunction};

/// Safety cap on the iteration depth.
pub const MAX_LEVEL: usize = 8;

/// `pi^level F` with its principal part and pole-order bound.
#[derive(Debug, Clone)]
pub struct MeromorphicIterate {
    pub samples: SampledMatrixFunction,
    pub principal: PrincipalPart,
    pub pole_order: usize,
    pub level: usize,
}

impl MeromorphicIterate {
    /// Wraps samples of a function with at most a pole of order
    /// `pole_order` at the origin as a level-0 iterate.
    pub fn new(samples: SampledMatrixFunction, pole_order: usize) -> Result<Self> {
        let principal = principal_part(&samples, pole_order)?;
        Ok(MeromorphicIterate { samples, principal, pole_order, level: 0 })
    }

    pub fn m(&self) -> usize {
        self.samples.m()
    }

    /// Value at an arbitrary point through the evaluator chain.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        self.samples.eval(z)
    }

    /// `F^-` at any `z != 0`.
    pub fn principal_eval(&self, z: Complex64) -> ComplexMatrix {
        self.principal.eval(z)
    }

    /// `F^+ = F - F^-` at any `z != 0` where the evaluator is valid.
    pub fn regular_eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        Ok(&self.eval(z)? - &self.principal.eval(z))
    }

    /// `F^+` at the `k`-th grid node.
    pub fn regular_at_node(&self, k: usize) -> ComplexMatrix {
        let z = self.samples.grid().node(k);
        self.samples.value(k) - &self.principal.eval(z)
    }

    /// Pole order actually visible on the sample circle.
    pub fn measured_pole_order(&self) -> usize {
        let floor = 1e-12 * crate::sampled::sup_norm_on_grid(&self.samples);
        self.principal.measured_order(self.samples.grid().radius(), floor)
    }
}

/// `pi` applied pointwise given `F(z)` and `F^-(z)`.
pub fn apply_pi(f: &ComplexMatrix, fm: &ComplexMatrix) -> ComplexMatrix {
    let fp = f - fm;
    let fp_f = &fp * f;
    let mut out = -&fp_f;
    out = out - &(f * fm);
    out += &(&fp * fm);
    out += &(&fp_f * fm);
    out
}

/// `F(z) = E(z) C(z) E(z)^-1 / (n^b z)` on the common grid of `E` and `C`.
/// The result has a pole of order at most `p + 1`.
pub fn build_f(
    e: &SampledMatrixFunction,
    c: &SampledMatrixFunction,
    n: f64,
    profile: &ExponentProfile,
) -> Result<MeromorphicIterate> {
    if e.grid() != c.grid() {
        return Err(Error::InvalidGrid("E and C must share a grid".into()));
    }
    if e.m() != c.m() {
        return Err(Error::SizeMismatch { expected: e.m(), found: c.m() });
    }
    if c.pole_order_bound() > profile.p as usize {
        return Err(Error::InvalidInput(format!(
            "C has pole order bound {} > p = {}",
            c.pole_order_bound(),
            profile.p
        )));
    }
    let scale = n.powf(profile.b);
    let assemble = move |z: Complex64, ez: &ComplexMatrix, cz: &ComplexMatrix| -> Result<ComplexMatrix> {
        let inv = mat_inv(ez)?;
        Ok((&(ez * cz) * &inv).scale(1.0 / (scale * z)))
    };
    let grid = *e.grid();
    let values = (0..grid.len())
        .map(|k| assemble(grid.node(k), e.value(k), c.value(k)))
        .collect::<Result<Vec<_>>>()?;
    let pole_order = profile.p as usize + 1;
    let mut samples = SampledMatrixFunction::from_samples(grid, values, pole_order)?;
    if let (Some(ef), Some(cf)) = (e.evaluator(), c.evaluator()) {
        let (ef, cf) = (ef.clone(), cf.clone());
        samples = samples.with_evaluator(matrix_fn(move |z| assemble(z, &ef(z)?, &cf(z)?)));
    }
    let samples = resolve(samples)?;
    MeromorphicIterate::new(samples, pole_order)
}

fn pi_evaluator(parent: &MeromorphicIterate) -> Option<MatrixFn> {
    let f = parent.samples.evaluator()?.clone();
    let pp = parent.principal.clone();
    Some(matrix_fn(move |z| Ok(apply_pi(&f(z)?, &pp.eval(z)))))
}

/// One application of `pi`. The pole-order bound doubles and the sample
/// grid is doubled (through the evaluator) until it resolves the result.
pub fn pi_once(f: &MeromorphicIterate) -> Result<MeromorphicIterate> {
    let grid = *f.samples.grid();
    let values = (0..grid.len())
        .map(|k| apply_pi(f.samples.value(k), &f.principal.eval(grid.node(k))))
        .collect::<Vec<_>>();
    let pole_order = 2 * f.pole_order;
    let mut samples = SampledMatrixFunction::from_samples(grid, values, pole_order)?;
    if let Some(ev) = pi_evaluator(f) {
        samples = samples.with_evaluator(ev);
    }
    let samples = resolve(samples)?;
    if samples.grid().len() <= 2 * pole_order.saturating_sub(1) {
        return Err(Error::BandwidthExceeded(format!(
            "pole order {pole_order} cannot be resolved with {} samples",
            samples.grid().len()
        )));
    }
    let principal = principal_part(&samples, pole_order)?;
    Ok(MeromorphicIterate { samples, principal, pole_order, level: f.level + 1 })
}

/// The chain `F, pi F, ..., pi^k F`, all on one grid.
pub fn pi_iterate(f: &MeromorphicIterate, k: usize) -> Result<Vec<MeromorphicIterate>> {
    if k > MAX_LEVEL {
        return Err(Error::InvalidInput(format!("iteration depth {k} exceeds cap {MAX_LEVEL}")));
    }
    let mut base = f.clone();
    loop {
        let mut chain = vec![base.clone()];
        for _ in 0..k {
            let next = pi_once(chain.last().expect("non-empty"))?;
            chain.push(next);
        }
        let finest = chain.iter().map(|it| it.samples.grid().len()).max().unwrap_or(0);
        if chain.iter().all(|it| it.samples.grid().len() == finest) {
            return Ok(chain);
        }
        // a deeper level needed more nodes: restart from a refined base
        if finest > MAX_SAMPLES {
            return Err(Error::BandwidthExceeded(format!("chain needs more than {MAX_SAMPLES} samples")));
        }
        let grid = base.samples.grid().with_len(finest)?;
        let samples = base.samples.resample(grid)?;
        base = MeromorphicIterate {
            principal: principal_part(&samples, base.pole_order)?,
            samples,
            ..base
        };
    }
}

/// Aliasing certificate of every level of a chain.
pub fn chain_aliasing(chain: &[MeromorphicIterate]) -> f64 {
    chain.iter().map(|it| aliasing_check(&it.samples)).fold(0.0, f64::max)
}

/// True when every level of the chain is resolved by its grid.
pub fn chain_is_resolved(chain: &[MeromorphicIterate]) -> bool {
    chain_aliasing(chain) < ALIASING_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::sampled::constant_fn;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn scalar_iterate(radius: f64, pole: usize, f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> MeromorphicIterate {
        let grid = CircleGrid::new(radius, 64).unwrap();
        let s = SampledMatrixFunction::from_fn(grid, 1, matrix_fn(move |z| Ok(ComplexMatrix::scalar(1, f(z)))), pole).unwrap();
        MeromorphicIterate::new(s, pole).unwrap()
    }

    fn test_points() -> Vec<Complex64> {
        (0..7).map(|k| Complex64::from_polar(0.37 + 0.02 * k as f64, 0.3 + 0.9 * k as f64)).collect()
    }

    fn profile(p: u32) -> ExponentProfile {
        ExponentProfile::new(1.0, 3.0, 4.0, 2.0, 2.0, p, 1.0).unwrap()
    }

    #[test]
    fn zero_c_gives_zero_f() {
        let grid = CircleGrid::new(0.125, 64).unwrap();
        let e = SampledMatrixFunction::from_fn(grid, 2, constant_fn(ComplexMatrix::identity(2)), 0).unwrap();
        let c = SampledMatrixFunction::from_fn(grid, 2, constant_fn(ComplexMatrix::zeros(2)), 0).unwrap();
        let f = build_f(&e, &c, 8.0, &profile(0)).unwrap();
        assert!(f.samples.values().iter().all(|v| v.norm() == 0.0));
        assert_eq!(f.pole_order, 1);
        assert_eq!(f.level, 0);
    }

    #[test]
    fn scalar_commutative_case() {
        let grid = CircleGrid::new(0.125, 64).unwrap();
        let gamma = Complex64::new(0.7, -0.2);
        let e = SampledMatrixFunction::from_fn(grid, 1, constant_fn(ComplexMatrix::identity(1)), 0).unwrap();
        let c = SampledMatrixFunction::from_fn(grid, 1, constant_fn(ComplexMatrix::scalar(1, gamma)), 0).unwrap();
        let n = 8.0_f64;
        let f = build_f(&e, &c, n, &profile(0)).unwrap();
        for k in 0..64 {
            let z = grid.node(k);
            let expected = gamma / (n.powi(3) * z);
            assert!((f.samples.value(k).get(0, 0) - expected).norm() < 1e-15);
        }
        assert!((f.principal.coeff(1).unwrap().get(0, 0) - gamma / n.powi(3)).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_conjugation_matches_hand_expansion() {
        let n = 16.0_f64;
        let p = profile(0);
        let a = ComplexMatrix::unit(2, 0, 1);
        let c0 = ComplexMatrix::from_fn(2, |i, j| Complex64::new(1.0 + i as f64, j as f64 - 0.5));
        let ne = n.powf(p.e);
        let grid = CircleGrid::new(n.powf(-p.a), 64).unwrap();
        let a1 = a.clone();
        let e = SampledMatrixFunction::from_fn(
            grid,
            2,
            matrix_fn(move |z| Ok(&ComplexMatrix::identity(2) + &a1.scale(re(ne) * z))),
            0,
        )
        .unwrap();
        let c = SampledMatrixFunction::from_fn(grid, 2, constant_fn(c0.clone()), 0).unwrap();
        let f = build_f(&e, &c, n, &p).unwrap();
        // with A^2 = 0: (I + tA) C0 (I - tA) = C0 + t(A C0 - C0 A) - t^2 A C0 A
        for z in test_points().into_iter().map(|z| z * 0.1) {
            let t = re(ne) * z;
            let conj = &(&c0 + &(&(&a * &c0) - &(&c0 * &a)).scale(t)) - &(&(&a * &c0) * &a).scale(t * t);
            let expected = conj.scale(1.0 / (n.powf(p.b) * z));
            assert!((&f.eval(z).unwrap() - &expected).norm() < 1e-12 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn pi_of_analytic_is_minus_square() {
        let f = scalar_iterate(0.5, 1, |z| z.exp() + z);
        let pf = pi_once(&f).unwrap();
        for z in test_points() {
            let fz = z.exp() + z;
            assert!((pf.eval(z).unwrap().get(0, 0) + fz * fz).norm() < 1e-11);
        }
        for k in 0..64 {
            let z = pf.samples.grid().node(k);
            let fz = z.exp() + z;
            assert!((pf.samples.value(k).get(0, 0) + fz * fz).norm() < 1e-11);
        }
    }

    #[test]
    fn pi_of_pure_pole_keeps_only_ffminus() {
        let grid = CircleGrid::new(0.5, 64).unwrap();
        let c0 = ComplexMatrix::from_fn(2, |i, j| Complex64::new(i as f64 + 0.5, 1.0 - j as f64));
        let c1 = c0.clone();
        let s = SampledMatrixFunction::from_fn(grid, 2, matrix_fn(move |z| Ok(c1.scale(1.0 / z))), 1).unwrap();
        let f = MeromorphicIterate::new(s, 1).unwrap();
        let pf = pi_once(&f).unwrap();
        let c2 = &c0 * &c0;
        for z in test_points() {
            let expected = -c2.scale(1.0 / (z * z));
            assert!((&pf.eval(z).unwrap() - &expected).norm() < 1e-11);
        }
        assert!((pf.principal.coeff(2).unwrap() + &c2).norm() < 1e-11);
    }

    #[test]
    fn pi_of_reciprocal_plus_one_is_minus_one() {
        let f = scalar_iterate(0.5, 1, |z| 1.0 / z + 1.0);
        let pf = pi_once(&f).unwrap();
        for z in test_points() {
            assert!((pf.eval(z).unwrap().get(0, 0) + re(1.0)).norm() < 1e-11);
        }
        assert!(pf.principal.coeffs().iter().all(|c| c.norm() < 1e-12));
        assert_eq!(pf.pole_order, 2);
        assert_eq!(pf.level, 1);
    }

    #[test]
    fn iterate_chain_lengths_and_fixed_point() {
        let f = scalar_iterate(0.5, 1, |z| 1.0 / z + 1.0);
        assert_eq!(pi_iterate(&f, 0).unwrap().len(), 1);
        let chain = pi_iterate(&f, 2).unwrap();
        assert_eq!(chain.len(), 3);
        // pi(-1) = -(-1)^2 = -1
        for level in &chain[1..] {
            for z in test_points() {
                assert!((level.eval(z).unwrap().get(0, 0) + re(1.0)).norm() < 1e-11);
            }
        }
        assert!(chain_is_resolved(&chain));
    }

    #[test]
    fn zero_stays_zero() {
        let f = scalar_iterate(0.5, 1, |_| re(0.0));
        let chain = pi_iterate(&f, 3).unwrap();
        assert!(chain.iter().all(|it| it.samples.values().iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn depth_cap_is_enforced() {
        let f = scalar_iterate(0.5, 1, |_| re(0.0));
        assert!(pi_iterate(&f, MAX_LEVEL + 1).is_err());
    }
}
