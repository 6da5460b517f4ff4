use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::matrix::ComplexMatrix;

/// Single-point evaluator of a matrix-valued function.
pub type MatrixFn = Arc<dyn Fn(Complex64) -> Result<ComplexMatrix> + Send + Sync>;

/// Wraps a closure as a [`MatrixFn`].
pub fn matrix_fn<F>(f: F) -> MatrixFn
where
    F: Fn(Complex64) -> Result<ComplexMatrix> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// A constant function.
pub fn constant_fn(value: ComplexMatrix) -> MatrixFn {
    Arc::new(move |_| Ok(value.clone()))
}

/// An `m x m` function known through its samples on a circle, optionally
/// with an evaluator valid on a neighbourhood of the circle.
#[derive(Clone)]
pub struct SampledMatrixFunction {
    grid: CircleGrid,
    m: usize,
    values: Vec<ComplexMatrix>,
    evaluator: Option<MatrixFn>,
    pole_order_bound: usize,
}

impl fmt::Debug for SampledMatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledMatrixFunction")
            .field("grid", &self.grid)
            .field("m", &self.m)
            .field("has_evaluator", &self.evaluator.is_some())
            .field("pole_order_bound", &self.pole_order_bound)
            .finish()
    }
}

impl SampledMatrixFunction {
    /// Samples `f` on the grid and keeps it as the evaluator.
    pub fn from_fn(grid: CircleGrid, m: usize, f: MatrixFn, pole_order_bound: usize) -> Result<Self> {
        let values = sample(&grid, m, &f)?;
        Ok(SampledMatrixFunction { grid, m, values, evaluator: Some(f), pole_order_bound })
    }

    pub fn from_samples(grid: CircleGrid, values: Vec<ComplexMatrix>, pole_order_bound: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let m = values[0].size();
        if let Some(bad) = values.iter().find(|v| v.size() != m) {
            return Err(Error::SizeMismatch { expected: m, found: bad.size() });
        }
        Ok(SampledMatrixFunction { grid, m, values, evaluator: None, pole_order_bound })
    }

    /// Attaches an evaluator to existing samples. Does not resample.
    pub fn with_evaluator(mut self, f: MatrixFn) -> Self {
        self.evaluator = Some(f);
        self
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[ComplexMatrix] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &ComplexMatrix {
        &self.values[k]
    }

    pub fn evaluator(&self) -> Option<&MatrixFn> {
        self.evaluator.as_ref()
    }

    pub fn pole_order_bound(&self) -> usize {
        self.pole_order_bound
    }

    /// Evaluates at an arbitrary point through the attached evaluator.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        match &self.evaluator {
            Some(f) => {
                let v = f(z)?;
                if v.size() != self.m {
                    return Err(Error::SizeMismatch { expected: self.m, found: v.size() });
                }
                Ok(v)
            }
            None => Err(Error::InvalidInput("function has no evaluator".into())),
        }
    }

    /// The same function sampled on another grid. Requires an evaluator;
    /// samples are never interpolated.
    pub fn resample(&self, grid: CircleGrid) -> Result<Self> {
        match &self.evaluator {
            Some(f) => Self::from_fn(grid, self.m, f.clone(), self.pole_order_bound),
            None => Err(Error::InvalidInput("cannot resample a function without evaluator".into())),
        }
    }

    /// Every `stride`-th sample, on the coarser grid those nodes form.
    pub(crate) fn subsample(&self, stride: usize) -> Result<Self> {
        let len = self.grid.len() / stride;
        let grid = CircleGrid::with_offset(
            self.grid.radius(),
            len,
            self.grid.offset() / stride as f64,
        )?;
        let values = self.values.iter().step_by(stride).cloned().collect();
        Ok(SampledMatrixFunction { grid, m: self.m, values, evaluator: None, pole_order_bound: self.pole_order_bound })
    }

    /// Pointwise map over the samples; the evaluator is dropped.
    pub fn map_samples(&self, f: impl Fn(Complex64, &ComplexMatrix) -> ComplexMatrix) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| f(self.grid.node(k), v))
            .collect();
        SampledMatrixFunction { values, evaluator: None, ..self.clone() }
    }

    /// Max deviation between stored samples and the evaluator, relative
    /// to the sample scale.
    pub fn evaluator_consistency(&self) -> Result<f64> {
        let scale = sup_norm_on_grid(self).max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for (k, v) in self.values.iter().enumerate() {
            let fresh = self.eval(self.grid.node(k))?;
            worst = worst.max((&fresh - v).norm());
        }
        Ok(worst / scale)
    }
}

fn sample(grid: &CircleGrid, m: usize, f: &MatrixFn) -> Result<Vec<ComplexMatrix>> {
    (0..grid.len())
        .map(|k| {
            let z = grid.node(k);
            let v = f(z)?;
            if v.size() != m {
                return Err(Error::SizeMismatch { expected: m, found: v.size() });
            }
            Ok(v)
        })
        .collect()
}

/// Max over grid nodes of the entrywise max-modulus norm.
pub fn sup_norm_on_grid(f: &SampledMatrixFunction) -> f64 {
    f.values.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

/// Pointwise product of two functions sampled on the same grid.
pub fn pointwise_product(
    left: &SampledMatrixFunction,
    right: &SampledMatrixFunction,
) -> Result<SampledMatrixFunction> {
    if left.grid != right.grid {
        return Err(Error::InvalidGrid("operands live on different grids".into()));
    }
    if left.m != right.m {
        return Err(Error::SizeMismatch { expected: left.m, found: right.m });
    }
    let values = left.values.iter().zip(&right.values).map(|(a, b)| a * b).collect();
    let evaluator = match (&left.evaluator, &right.evaluator) {
        (Some(f), Some(g)) => {
            let (f, g) = (f.clone(), g.clone());
            Some(matrix_fn(move |z| Ok(&f(z)? * &g(z)?)))
        }
        _ => None,
    };
    Ok(SampledMatrixFunction {
        grid: left.grid,
        m: left.m,
        values,
        evaluator,
        pole_order_bound: left.pole_order_bound + right.pole_order_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(z: Complex64) -> ComplexMatrix {
        ComplexMatrix::scalar(1, z)
    }

    #[test]
    fn sup_norm_of_identity_is_one() {
        let g = CircleGrid::new(0.3, 16).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 2, crate::sampled::constant_fn(ComplexMatrix::identity(2)), 0).unwrap();
        assert_eq!(sup_norm_on_grid(&f), 1.0);
    }

    #[test]
    fn sup_norm_of_z_is_radius() {
        let g = CircleGrid::new(0.7, 32).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 1, matrix_fn(|z| Ok(scalar(z))), 0).unwrap();
        assert!((sup_norm_on_grid(&f) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_of_reciprocal() {
        let g = CircleGrid::new(0.5, 32).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 1, matrix_fn(|z| Ok(scalar(1.0 / z))), 1).unwrap();
        assert!((sup_norm_on_grid(&f) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn samples_agree_with_evaluator() {
        let g = CircleGrid::staggered(0.25, 64).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 1, matrix_fn(|z| Ok(scalar(z.exp() / z))), 1).unwrap();
        assert!(f.evaluator_consistency().unwrap() < 1e-12);
    }

    #[test]
    fn refinement_is_stable_for_constant_modulus() {
        let g = CircleGrid::new(0.9, 64).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 1, matrix_fn(|z| Ok(scalar(z * z))), 0).unwrap();
        let fine = f.resample(g.refined()).unwrap();
        assert!((sup_norm_on_grid(&f) - sup_norm_on_grid(&fine)).abs() < 1e-8);
    }

    #[test]
    fn subsample_keeps_matching_nodes() {
        let g = CircleGrid::staggered(1.0, 16).unwrap();
        let f = SampledMatrixFunction::from_fn(g, 1, matrix_fn(|z| Ok(scalar(z))), 0).unwrap();
        let coarse = f.subsample(2).unwrap();
        for k in 0..8 {
            assert!((coarse.grid().node(k) - coarse.value(k).get(0, 0)).norm() < 1e-15);
        }
    }
}
