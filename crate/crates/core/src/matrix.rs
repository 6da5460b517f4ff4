//! Dense complex `m x m` matrices.
//!
//! All bounds in this crate are stated in the entrywise max-modulus norm
//! `|A| = max_ij |a_ij|`. It is submultiplicative up to a factor `m`:
//! `|AB| <= m |A| |B|`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reciprocal condition estimate below which [`mat_inv`] reports `Singular`.
pub const RCOND_FLOOR: f64 = 1e-13;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(m: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(m, m))
    }

    pub fn identity(m: usize) -> Self {
        ComplexMatrix(DMatrix::identity(m, m))
    }

    /// `lambda * I`.
    pub fn scalar(m: usize, lambda: Complex64) -> Self {
        ComplexMatrix(DMatrix::from_diagonal_element(m, m, lambda))
    }

    /// The matrix unit `E_ij` (zero-based indices).
    pub fn unit(m: usize, i: usize, j: usize) -> Self {
        let mut out = Self::zeros(m);
        out.0[(i, j)] = ONE;
        out
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let m = entries.len();
        let mut out = Self::zeros(m);
        for (i, &v) in entries.iter().enumerate() {
            out.0[(i, i)] = v;
        }
        out
    }

    pub fn from_fn(m: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix(DMatrix::from_fn(m, m, f))
    }

    /// Builds a matrix from row slices. Fails unless the rows form a square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::SizeMismatch { expected: m, found: bad.len() });
        }
        Ok(Self::from_fn(m, |i, j| rows[i][j]))
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// Entrywise max-modulus norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Maximum absolute column sum (operator 1-norm).
    pub fn norm_one(&self) -> f64 {
        self.0
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `|self - I|` in the max-modulus norm.
    pub fn distance_to_identity(&self) -> f64 {
        let m = self.size();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((self.0[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        ComplexMatrix(&self.0 * lambda)
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn is_diagonal(&self) -> bool {
        let m = self.size();
        (0..m).all(|i| (0..m).all(|j| i == j || self.0[(i, j)] == ZERO))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.size()).map(|i| self.0[(i, i)]).collect()
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut exponent: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.size());
        while exponent > 0 {
            if exponent & 1 == 1 {
                acc = &acc * &base;
            }
            exponent >>= 1;
            if exponent > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Reciprocal condition number in the 1-norm, computed from an explicit
    /// inverse. Zero when the LU factorization breaks down.
    pub fn rcond(&self) -> f64 {
        match self.0.clone().try_inverse() {
            Some(inv) => {
                let inv = ComplexMatrix(inv);
                let denom = self.norm_one() * inv.norm_one();
                if denom.is_finite() && denom > 0.0 {
                    1.0 / denom
                } else {
                    0.0
                }
            }
            None => 0.0,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        mat_inv(self)
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch { expected: self.size(), found: other.size() });
        }
        Ok(())
    }
}

/// Checked product `A * B`.
pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_size(b)?;
    Ok(a * b)
}

/// Inverse with a conditioning gate: rejects matrices whose reciprocal
/// condition estimate falls below [`RCOND_FLOOR`].
pub fn mat_inv(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::Singular { rcond: 0.0 });
    }
    let inv = match a.0.clone().try_inverse() {
        Some(inv) => ComplexMatrix(inv),
        None => return Err(Error::Singular { rcond: 0.0 }),
    };
    let denom = a.norm_one() * inv.norm_one();
    let rcond = if denom.is_finite() && denom > 0.0 { 1.0 / denom } else { 0.0 };
    if rcond < RCOND_FLOOR || !inv.is_finite() {
        return Err(Error::Singular { rcond });
    }
    Ok(inv)
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.size();
        write!(f, "[")?;
        for i in 0..m {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..m {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self.0[(i, j)];
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

impl Mul<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * &rhs.0)
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs)
    }
}

impl Mul<Complex64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs)
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Add<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + &rhs.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Sub<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - &rhs.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}
