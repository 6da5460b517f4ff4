//! Gauss-Legendre rules and composite panels for line-segment integrals.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Nodes and weights of the `len`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending. Golub-Welsch: eigen-decomposition of the Jacobi matrix.
pub fn gauss_legendre(len: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(len > 0, "rule needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(len, len);
    for k in 1..len {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k - 1, k)] = beta;
        jacobi[(k, k - 1)] = beta;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..len)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // symmetrize: the rule is exactly symmetric, the eigensolver is not
    for i in 0..len / 2 {
        let j = len - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if len % 2 == 1 {
        pairs[len / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// A quadrature rule on a straight segment of the complex plane:
/// `sum_k weights[k] g(nodes[k]) ~ int g(s) ds` along the segment.
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

/// Composite Gauss-Legendre rule on the segment `start -> end`, with panel
/// breakpoints graded geometrically toward `start`: the first panel has
/// length `ratio^(panels-1)` times the last, each next one `1/ratio` of
/// the remaining length. `ratio = 1` gives uniform panels.
pub fn graded_segment(start: Complex64, end: Complex64, panels: usize, ratio: f64, order: usize) -> SegmentRule {
    assert!(panels > 0 && ratio > 0.0 && ratio <= 1.0);
    let (x, w) = gauss_legendre(order);
    // breakpoints t_0 = 0 < t_1 < ... < t_panels = 1
    let mut breaks = vec![1.0_f64];
    for _ in 0..panels - 1 {
        let last = *breaks.last().expect("non-empty");
        breaks.push(last * ratio);
    }
    breaks.push(0.0);
    breaks.reverse();
    let span = end - start;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for pair in breaks.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let half = 0.5 * (t1 - t0);
        let mid = 0.5 * (t1 + t0);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(start + span * (mid + half * xi));
            weights.push(span * (half * wi));
        }
    }
    SegmentRule { nodes, weights }
}
