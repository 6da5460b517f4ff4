use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `M` equispaced nodes on the origin-centred circle of the given radius,
/// positively oriented. Node `k` sits at angle `2 pi (k + offset) / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleGrid {
    radius: f64,
    len: usize,
    offset: f64,
}

impl CircleGrid {
    pub fn new(radius: f64, len: usize) -> Result<Self> {
        Self::with_offset(radius, len, 0.0)
    }

    /// Half-step offset grid: no node lies on the real axis.
    pub fn staggered(radius: f64, len: usize) -> Result<Self> {
        Self::with_offset(radius, len, 0.5)
    }

    pub fn with_offset(radius: f64, len: usize, offset: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("sample count must be a power of two, got {len}")));
        }
        if !(0.0..1.0).contains(&offset) {
            return Err(Error::InvalidGrid(format!("offset must lie in [0, 1), got {offset}")));
        }
        Ok(CircleGrid { radius, len, offset })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Same circle, same offset, twice the nodes.
    pub fn refined(&self) -> Self {
        CircleGrid { len: self.len * 2, ..*self }
    }

    pub fn with_len(&self, len: usize) -> Result<Self> {
        Self::with_offset(self.radius, len, self.offset)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::with_offset(radius, self.len, self.offset)
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64 + self.offset) / self.len as f64
    }

    /// Unit-modulus factor `exp(i angle_k)`.
    pub fn phase(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angle(k))
    }

    pub fn node(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius, self.angle(k))
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.len).map(|k| self.node(k)).collect()
    }

    /// `exp(-i j angle_k)` with the integer part of the phase reduced
    /// modulo `M` so large `j` keep full accuracy.
    pub(crate) fn phase_power(&self, k: usize, j: i64) -> Complex64 {
        let m = self.len as i64;
        let whole = ((k as i64) * j).rem_euclid(m) as f64;
        let frac = self.offset * j as f64;
        Complex64::from_polar(1.0, -2.0 * PI * (whole + frac) / self.len as f64)
    }
}
