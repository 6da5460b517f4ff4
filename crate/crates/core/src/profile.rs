use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for the exact-arithmetic comparisons on
/// exponents (`c <= b - a`, `2^K < ratio`, ...). Published profiles are
/// rationals such as 16/3 whose float images are off by an ulp.
pub const EXPONENT_TOL: f64 = 1e-12;

pub(crate) fn lt(x: f64, y: f64) -> bool {
    x < y - EXPONENT_TOL * (1.0 + x.abs().max(y.abs()))
}

pub(crate) fn le(x: f64, y: f64) -> bool {
    !lt(y, x)
}

/// Rates of a matching problem.
///
/// * `a` - inner circle radius `n^-a`
/// * `b` - parametrix scale, `F ~ 1/(n^b z)`
/// * `c` - remainder decay `O(n^-c)`
/// * `d` - prefactor growth, `|E|, |E^-1| = O(n^(d/2))`
/// * `e` - Lipschitz scale of `E^-1(z) E(w)`
/// * `p` - pole-order bound of `C` at the origin
/// * `r` - outer circle radius
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    #[serde(default)]
    pub p: u32,
    #[serde(default = "default_outer_radius")]
    pub r: f64,
}

fn default_outer_radius() -> f64 {
    1.0
}

impl ExponentProfile {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, p: u32, r: f64) -> Result<Self> {
        let profile = ExponentProfile { a, b, c, d, e, p, r };
        profile.validate()?;
        Ok(profile)
    }

    /// Checks `a <= e < b`, `d < min(b, c)`, nonnegativity, and `r > 1`
    /// when `a = 0`.
    pub fn validate(&self) -> Result<()> {
        let ExponentProfile { a, b, c, d, e, r, .. } = *self;
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("e", e), ("r", r)] {
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!("{name} must be finite")));
            }
        }
        if a < 0.0 || d < 0.0 || e < 0.0 {
            return Err(Error::InvalidProfile("a, d, e must be nonnegative".into()));
        }
        if b <= 0.0 || c <= 0.0 || r <= 0.0 {
            return Err(Error::InvalidProfile("b, c, r must be positive".into()));
        }
        if !le(a, e) {
            return Err(Error::InvalidProfile(format!("a <= e violated (a = {a}, e = {e})")));
        }
        if !lt(e, b) {
            return Err(Error::InvalidProfile(format!("e < b violated (e = {e}, b = {b})")));
        }
        if !lt(d, b.min(c)) {
            return Err(Error::InvalidProfile(format!(
                "d < min(b, c) violated (d = {d}, b = {b}, c = {c})"
            )));
        }
        if a == 0.0 && r <= 1.0 {
            return Err(Error::InvalidProfile("r > 1 is required when a = 0".into()));
        }
        Ok(())
    }

    /// `c > b - a`: a double matching is actually needed.
    pub fn nontrivial(&self) -> bool {
        lt(self.b - self.a, self.c)
    }

    pub fn inner_radius(&self, n: f64) -> f64 {
        n.powf(-self.a)
    }

    /// Predicted exponent of the inner matching residual, `d - c`.
    pub fn predicted_inner(&self) -> f64 {
        self.d - self.c
    }

    /// Predicted exponent of the outer matching residual, `d - b`.
    pub fn predicted_outer(&self) -> f64 {
        self.d - self.b
    }
}
