//! Truncated Laurent series arithmetic, used as an independent oracle for
//! the sampled pipeline, plus seeded random rational test functions.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use doublematch::cauchy::regular_part_eval;
use doublematch::pi::{pi_iterate, MeromorphicIterate};
use doublematch::{CircleGrid, Complex64, ComplexMatrix, SampledMatrixFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sum_{k = lo}^{lo + len - 1} coeffs[k - lo] z^k`, with every power above
/// `top` discarded.
#[derive(Debug, Clone)]
pub struct Laurent {
    pub m: usize,
    pub lo: i64,
    pub coeffs: Vec<ComplexMatrix>,
    pub top: i64,
}

impl Laurent {
    pub fn zero(m: usize, top: i64) -> Self {
        Laurent { m, lo: 0, coeffs: Vec::new(), top }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> ComplexMatrix {
        if k < self.lo || k > self.hi() {
            return ComplexMatrix::zeros(self.m);
        }
        self.coeffs[(k - self.lo) as usize].clone()
    }

    fn from_range(m: usize, lo: i64, hi: i64, top: i64, f: impl Fn(i64) -> ComplexMatrix) -> Self {
        let hi = hi.min(top);
        if hi < lo {
            return Laurent { m, lo: 0, coeffs: Vec::new(), top };
        }
        Laurent { m, lo, coeffs: (lo..=hi).map(f).collect(), top }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        if self.coeffs.is_empty() {
            return other.clone();
        }
        if other.coeffs.is_empty() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        Laurent::from_range(self.m, lo, hi, self.top, |k| &self.coeff(k) + &other.coeff(k))
    }

    pub fn neg(&self) -> Laurent {
        Laurent { coeffs: self.coeffs.iter().map(|c| -c).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Laurent) -> Laurent {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Laurent::zero(self.m, self.top);
        }
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        Laurent::from_range(self.m, lo, hi, self.top, |k| {
            let mut acc = ComplexMatrix::zeros(self.m);
            for i in self.lo..=self.hi() {
                let j = k - i;
                if j >= other.lo && j <= other.hi() {
                    acc += &(&self.coeffs[(i - self.lo) as usize] * &other.coeffs[(j - other.lo) as usize]);
                }
            }
            acc
        })
    }

    /// Negative powers only.
    pub fn minus_part(&self) -> Laurent {
        Laurent::from_range(self.m, self.lo, self.hi().min(-1), self.top, |k| self.coeff(k))
    }

    /// Nonnegative powers only.
    pub fn plus_part(&self) -> Laurent {
        Laurent::from_range(self.m, self.lo.max(0), self.hi(), self.top, |k| self.coeff(k))
    }

    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.m);
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += &c.scale(z.powi((self.lo + i as i64) as i32));
        }
        acc
    }

    /// `-F^+ F - F F^- + F^+ F^- + F^+ F F^-`.
    pub fn pi(&self) -> Laurent {
        let fp = self.plus_part();
        let fm = self.minus_part();
        let fp_f = fp.mul(self);
        fp_f.neg().sub(&self.mul(&fm)).add(&fp.mul(&fm)).add(&fp_f.mul(&fm))
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let r: f64 = rng.gen_range(0.0..1.0_f64).sqrt();
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, |_, _| random_complex(rng))
}

/// `sum_{k=-q}^{deg} F_k z^k + W z0/(z0 - z)`.
#[derive(Debug, Clone)]
pub struct RandomRational {
    pub m: usize,
    pub q: usize,
    pub poly: Vec<(i64, ComplexMatrix)>,
    pub w: ComplexMatrix,
    pub z0: Complex64,
}

impl RandomRational {
    /// Coefficients are scaled so that every term is `O(1)` on `|z| = radius`;
    /// the simple pole `z0` has modulus in `[2, 3]`.
    pub fn draw(rng: &mut ChaCha8Rng, m: usize, q: usize, radius: f64) -> Self {
        let deg = rng.gen_range(0..=4_i64);
        let poly = (-(q as i64)..=deg)
            .map(|k| (k, random_matrix(rng, m).scale(Complex64::new(radius.powi(-k as i32), 0.0))))
            .collect();
        let z0 = Complex64::from_polar(rng.gen_range(2.0..3.0), rng.gen_range(0.0..std::f64::consts::TAU));
        RandomRational { m, q, poly, w: random_matrix(rng, m), z0 }
    }

    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let mut acc = self.w.scale(self.z0 / (self.z0 - z));
        for (k, c) in &self.poly {
            acc += &c.scale(z.powi(*k as i32));
        }
        acc
    }

    /// Laurent expansion about 0, geometric tail cut at `z^top`.
    pub fn series(&self, top: i64) -> Laurent {
        let lo = -(self.q as i64);
        Laurent::from_range(self.m, lo, top, top, |k| {
            let mut c = if k >= 0 { self.w.scale(self.z0.powi(-k as i32)) } else { ComplexMatrix::zeros(self.m) };
            for (j, p) in &self.poly {
                if *j == k {
                    c += p;
                }
            }
            c
        })
    }
}

/// Iterate chain `F, pi F, pi^2 F` from samples only, on `len` staggered
/// nodes of radius `radius`.
pub fn sampled_chain(f: &RandomRational, radius: f64, len: usize) -> Vec<MeromorphicIterate> {
    let grid = CircleGrid::staggered(radius, len).unwrap();
    let values = grid.nodes().into_iter().map(|z| f.eval(z)).collect();
    let samples = SampledMatrixFunction::from_samples(grid, values, f.q).unwrap();
    let base = MeromorphicIterate::new(samples, f.q).unwrap();
    pi_iterate(&base, 2).unwrap()
}

/// Value of an iterate inside its sample circle: Cauchy sum for the
/// regular part plus the extracted principal part.
pub fn interior_value(it: &MeromorphicIterate, z: Complex64) -> ComplexMatrix {
    &regular_part_eval(&it.samples, &it.principal, z).unwrap() + &it.principal_eval(z)
}

pub struct OracleOutcome {
    pub cases: usize,
    pub points: usize,
    pub max_rel_err: f64,
    pub elapsed: Duration,
}

pub const ORACLE_RADIUS: f64 = 0.5;
pub const ORACLE_NODES: usize = 256;
pub const ORACLE_TOP: i64 = 160;

/// `cases` random rationals (`m` in {1, 2}, pole order 1..=3) compared
/// against the series oracle for `pi F` and `pi^2 F` at 16 random
/// off-grid points with `0.3 <= |z| <= 0.44`.
pub fn oracle_equivalence(seed: u64, cases: usize) -> OracleOutcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_err = 0.0_f64;
    let mut points = 0;
    for _ in 0..cases {
        let m = rng.gen_range(1..=2);
        let q = rng.gen_range(1..=3);
        let f = RandomRational::draw(&mut rng, m, q, ORACLE_RADIUS);
        let chain = sampled_chain(&f, ORACLE_RADIUS, ORACLE_NODES);
        let s0 = f.series(ORACLE_TOP);
        let s1 = s0.pi();
        let s2 = s1.pi();
        for _ in 0..16 {
            let z = Complex64::from_polar(rng.gen_range(0.3..0.44), rng.gen_range(0.0..std::f64::consts::TAU));
            for (it, oracle) in [(&chain[1], &s1), (&chain[2], &s2)] {
                let want = oracle.eval(z);
                let got = interior_value(it, z);
                max_rel_err = max_rel_err.max((&got - &want).norm() / want.norm());
            }
            points += 1;
        }
    }
    OracleOutcome { cases, points, max_rel_err, elapsed: start.elapsed() }
}
