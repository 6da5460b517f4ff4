//! The double-matching prefactors.
//!
//! With `K` the largest integer such that `2^K < (a + c - e)/(b - e)`,
//!
//! ```text
//! E_n^0(z)        = (I - (pi^K F)^+) (I - (pi^(K-1) F)^+) ... (I - F^+) E(z)
//! E_n^inf(z)^-1   = (I - F^-) (I - (pi F)^-) ... (I - (pi^K F)^-)
//! ```
//!
//! The first is analytic in the inner disc, the second a polynomial in
//! `1/z` with constant term `I`.

use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::{regular_part_eval, PrincipalPart, GUARD};
use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::matrix::{mat_inv, ComplexMatrix};
use crate::pi::MeromorphicIterate;
use crate::profile::{le, lt, ExponentProfile};
use crate::sampled::SampledMatrixFunction;

/// Neumann threshold for the factors `I - H`.
pub const NEUMANN_THRESHOLD: f64 = 0.5;
/// Highest power of `H` tried by the nonsingularity certificate.
pub const MAX_NEUMANN_POWER: u32 = 8;
/// Outer-polynomial terms below this size on the inner circle do not count
/// towards the measured degree.
pub const DEGREE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefactorPlan {
    /// Iteration depth; `None` on the trivial route.
    pub k: Option<usize>,
    pub ratio: f64,
    pub trivial: bool,
}

impl PrefactorPlan {
    /// Algebraic degree of `E_n^inf^-1`: the sum of the pole-order bounds
    /// `2^j (p + 1)`, `j = 0..=K`.
    pub fn degree_sum(&self, profile: &ExponentProfile) -> usize {
        match self.k {
            Some(k) => ((1usize << (k + 1)) - 1) * (profile.p as usize + 1),
            None => 0,
        }
    }

    /// The published bound `2^(K(K+1)/2) (p + 1)`.
    pub fn degree_bound(&self, profile: &ExponentProfile) -> usize {
        match self.k {
            Some(k) => (1usize << (k * (k + 1) / 2)) * (profile.p as usize + 1),
            None => 0,
        }
    }
}

/// Iteration depth and route for a profile.
pub fn plan(profile: &ExponentProfile) -> Result<PrefactorPlan> {
    profile.validate()?;
    let ExponentProfile { a, b, c, e, .. } = *profile;
    let ratio = (a + c - e) / (b - e);
    if !profile.nontrivial() {
        return Ok(PrefactorPlan { k: None, ratio, trivial: true });
    }
    if le(ratio, 1.0) {
        return Err(Error::InvalidProfile(format!(
            "(a + c - e)/(b - e) = {ratio} <= 1 leaves no admissible depth"
        )));
    }
    let mut k = 0usize;
    while lt(2f64.powi(k as i32 + 1), ratio) {
        k += 1;
    }
    Ok(PrefactorPlan { k: Some(k), ratio, trivial: false })
}

/// `E_n^0`, analytic on the closed inner disc.
#[derive(Debug, Clone)]
pub struct InnerPrefactor {
    /// `I - (pi^(K-j) F)^+` for `j = 0..=K`, then `E`, on the inner grid.
    pub factors: Vec<SampledMatrixFunction>,
    composite: Vec<ComplexMatrix>,
    /// `pi^(K-j) F` in factor order; empty on the trivial route.
    iterates: Vec<MeromorphicIterate>,
    e: SampledMatrixFunction,
}

impl InnerPrefactor {
    pub fn grid(&self) -> &CircleGrid {
        self.e.grid()
    }

    pub fn m(&self) -> usize {
        self.e.m()
    }

    /// Product of the factor samples at each grid node.
    pub fn composite(&self) -> &[ComplexMatrix] {
        &self.composite
    }

    pub fn e(&self) -> &SampledMatrixFunction {
        &self.e
    }

    /// Number of `I - H` factors (excluding `E`).
    pub fn depth(&self) -> usize {
        self.iterates.len()
    }

    /// `H = (pi^(K-j) F)^+` at `z`. Inside the guard band the regular part
    /// comes from the Cauchy sum, which avoids cancelling `F^-` against a
    /// large `F`; elsewhere from the evaluator chain.
    pub fn h_eval(&self, j: usize, z: Complex64) -> Result<ComplexMatrix> {
        let it = &self.iterates[j];
        if z.norm() < GUARD * it.samples.grid().radius() {
            regular_part_eval(&it.samples, &it.principal, z)
        } else {
            it.regular_eval(z)
        }
    }

    fn e_eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        if self.e.evaluator().is_some() {
            self.e.eval(z)
        } else {
            regular_part_eval(&self.e, &PrincipalPart::zero(self.m()), z)
        }
    }

    /// `E_n^0(z)` for `z` in the closed inner disc (and wherever the
    /// evaluators extend).
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let id = ComplexMatrix::identity(self.m());
        let mut acc = id.clone();
        for j in 0..self.iterates.len() {
            acc = &acc * &(&id - &self.h_eval(j, z)?);
        }
        Ok(&acc * &self.e_eval(z)?)
    }

    /// Max deviation between the stored composite and the product of the
    /// stored factors, node by node.
    pub fn composite_consistency(&self) -> f64 {
        (0..self.grid().len())
            .map(|k| {
                let prod = self
                    .factors
                    .iter()
                    .skip(1)
                    .fold(self.factors[0].value(k).clone(), |acc, f| &acc * f.value(k));
                (&prod - &self.composite[k]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `E_n^inf`, stored through the coefficients of its inverse as a
/// polynomial in `1/z`.
#[derive(Debug, Clone)]
pub struct OuterPrefactor {
    /// `inv_poly[j]` multiplies `z^-j`; `inv_poly[0] = I`.
    pub inv_poly: Vec<ComplexMatrix>,
    /// Measured degree: highest `j` whose term is visible on the inner
    /// circle above [`DEGREE_FLOOR`].
    pub deg: usize,
    /// `(pi^j F)^-`, `j = 0..=K`, in product order.
    pub factors: Vec<PrincipalPart>,
    pub inner_radius: f64,
}

impl OuterPrefactor {
    pub fn identity(m: usize, inner_radius: f64) -> Self {
        OuterPrefactor { inv_poly: vec![ComplexMatrix::identity(m)], deg: 0, factors: Vec::new(), inner_radius }
    }

    pub fn m(&self) -> usize {
        self.inv_poly[0].size()
    }

    /// `E_n^inf(z)^-1` (Horner in `1/z`).
    pub fn eval_inverse(&self, z: Complex64) -> ComplexMatrix {
        let w = 1.0 / z;
        let mut acc = ComplexMatrix::zeros(self.m());
        for c in self.inv_poly.iter().rev() {
            acc = &acc.scale(w) + c;
        }
        acc
    }

    /// Algebraic degree (stored coefficient count minus one).
    pub fn stored_degree(&self) -> usize {
        self.inv_poly.len() - 1
    }
}

fn measured_degree(poly: &[ComplexMatrix], radius: f64) -> usize {
    poly.iter()
        .enumerate()
        .rposition(|(j, c)| c.norm() * radius.powi(-(j as i32)) > DEGREE_FLOOR)
        .unwrap_or(0)
}

/// `E_n^inf(z)`: evaluates the inverse polynomial and inverts it.
pub fn eval_outer(einf: &OuterPrefactor, z: Complex64) -> Result<ComplexMatrix> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidInput("E_n^inf is not defined at the origin".into()));
    }
    mat_inv(&einf.eval_inverse(z))
}

/// `(I - P_1/z - ...)` times a polynomial in `1/z`, by coefficient
/// convolution.
fn times_one_minus(poly: &[ComplexMatrix], pp: &PrincipalPart) -> Vec<ComplexMatrix> {
    let m = poly[0].size();
    let mut out = vec![ComplexMatrix::zeros(m); poly.len() + pp.q()];
    for (i, left) in poly.iter().enumerate() {
        out[i] += left;
        for (j, right) in pp.coeffs().iter().enumerate() {
            out[i + j + 1] += &-&(left * right);
        }
    }
    out
}

/// Assembles both prefactors from the chain `F, pi F, ..., pi^K F`.
pub fn build_prefactors(
    chain: &[MeromorphicIterate],
    e: &SampledMatrixFunction,
    plan: &PrefactorPlan,
) -> Result<(InnerPrefactor, OuterPrefactor)> {
    let k = match (plan.trivial, plan.k) {
        (false, Some(k)) => k,
        _ => return Err(Error::InvalidInput("trivial plan: use trivial_prefactors".into())),
    };
    if chain.len() != k + 1 {
        return Err(Error::InvalidInput(format!("chain has {} levels, plan needs {}", chain.len(), k + 1)));
    }
    let grid = *chain[0].samples.grid();
    if chain.iter().any(|it| *it.samples.grid() != grid) {
        return Err(Error::InvalidGrid("chain levels live on different grids".into()));
    }
    let m = chain[0].m();
    if e.m() != m {
        return Err(Error::SizeMismatch { expected: m, found: e.m() });
    }
    let e = if *e.grid() == grid { e.clone() } else { e.resample(grid)? };

    let id = ComplexMatrix::identity(m);
    let iterates: Vec<MeromorphicIterate> = chain.iter().rev().cloned().collect();
    let mut factors: Vec<SampledMatrixFunction> = iterates
        .iter()
        .map(|it| {
            let values = (0..grid.len()).map(|node| &id - &it.regular_at_node(node)).collect();
            SampledMatrixFunction::from_samples(grid, values, 0)
        })
        .collect::<Result<_>>()?;
    factors.push(e.clone());
    let composite = (0..grid.len())
        .map(|node| factors.iter().skip(1).fold(factors[0].value(node).clone(), |acc, f| &acc * f.value(node)))
        .collect();
    let inner = InnerPrefactor { factors, composite, iterates, e };

    let mut poly = vec![id];
    let outer_factors: Vec<PrincipalPart> = chain.iter().map(|it| it.principal.clone()).collect();
    for pp in &outer_factors {
        poly = times_one_minus(&poly, pp);
    }
    let radius = grid.radius();
    let deg = measured_degree(&poly, radius);
    let outer = OuterPrefactor { inv_poly: poly, deg, factors: outer_factors, inner_radius: radius };

    if !nonsingularity_certificate(Prefactor::Inner(&inner), &grid)
        || !nonsingularity_certificate(Prefactor::Outer(&outer), &grid)
    {
        return Err(Error::Singular { rcond: 0.0 });
    }
    Ok((inner, outer))
}

/// `(E, I)`: no double matching is needed when `c <= b - a`.
pub fn trivial_prefactors(e: &SampledMatrixFunction) -> (InnerPrefactor, OuterPrefactor) {
    let inner = InnerPrefactor {
        factors: vec![e.clone()],
        composite: e.values().to_vec(),
        iterates: Vec::new(),
        e: e.clone(),
    };
    (inner, OuterPrefactor::identity(e.m(), e.grid().radius()))
}

#[derive(Debug, Clone, Copy)]
pub enum Prefactor<'a> {
    Inner(&'a InnerPrefactor),
    Outer(&'a OuterPrefactor),
}

/// `min over L` of a bound on the spectral radius of `H` from its powers:
/// `sup |H|` for `L = 1`, `(m sup |H^L|)^(1/L)` for `L >= 2` (the factor `m`
/// turns the max-modulus norm into an operator-norm bound).
pub fn neumann_bound(samples: &[ComplexMatrix]) -> f64 {
    let Some(first) = samples.first() else {
        return 0.0;
    };
    let m = first.size() as f64;
    let mut best = samples.iter().map(ComplexMatrix::norm).fold(0.0, f64::max);
    let mut powers: Vec<ComplexMatrix> = samples.to_vec();
    for l in 2..=MAX_NEUMANN_POWER {
        powers = powers.iter().zip(samples).map(|(p, h)| p * h).collect();
        let sup = powers.iter().map(ComplexMatrix::norm).fold(0.0, f64::max);
        best = best.min((m * sup).powf(1.0 / l as f64));
    }
    best
}

/// True iff every factor `I - H` passes the Neumann test on `grid` and the
/// composite inverts at every node. For the inner prefactor `grid` should be
/// the inner circle; for the outer one any circle `|z| >= n^-a` (the inner
/// circle is the worst case, since `H -> 0` at infinity).
pub fn nonsingularity_certificate(pre: Prefactor<'_>, grid: &CircleGrid) -> bool {
    let nodes = grid.nodes();
    match pre {
        Prefactor::Inner(inner) => {
            for j in 0..inner.depth() {
                let hs: Result<Vec<_>> = nodes.iter().map(|&z| inner.h_eval(j, z)).collect();
                match hs {
                    Ok(hs) if neumann_bound(&hs) < NEUMANN_THRESHOLD => {}
                    _ => return false,
                }
            }
            nodes.iter().all(|&z| inner.eval(z).and_then(|v| mat_inv(&v)).is_ok())
        }
        Prefactor::Outer(outer) => {
            for pp in &outer.factors {
                let hs: Vec<_> = nodes.iter().map(|&z| pp.eval(z)).collect();
                if neumann_bound(&hs) >= NEUMANN_THRESHOLD {
                    return false;
                }
            }
            nodes.iter().all(|&z| eval_outer(outer, z).is_ok())
        }
    }
}
