//! Entropy surrogates: polynomial least squares with regression diagnostics,
//! and a small tanh network trained by full-batch gradient descent.

mod lsq;
mod net;

pub use lsq::{
    f_upper_tail, fit_least_squares, residual_report, runs_test_z, Diagnostics, FitResult,
    RANK_TOL,
};
pub use net::{gradient_check, loss_gradient, train_net, Activation, Layer, NetModel, TrainedNet};

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Feature vectors with one scalar target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(invalid(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.len() < 2 {
            return Err(invalid("a dataset needs at least two observations"));
        }
        let dim = inputs[0].len();
        if dim == 0 || inputs.iter().any(|x| x.len() != dim) {
            return Err(invalid("all inputs must share one nonzero dimension"));
        }
        if inputs.iter().flatten().chain(&targets).any(|v| !v.is_finite()) {
            return Err(invalid("dataset values must be finite"));
        }
        Ok(Self { inputs, targets })
    }

    /// One scalar input per observation.
    pub fn scalar(inputs: &[f64], targets: &[f64]) -> Result<Self> {
        Self::new(inputs.iter().map(|&x| vec![x]).collect(), targets.to_vec())
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }
}

/// Polynomial design matrix `[1, t, …, t^degree]` for scalar inputs.
pub fn featurize(ds: &Dataset, degree: usize) -> Result<DMatrix<f64>> {
    if degree > 0 && ds.input_dim() != 1 {
        return Err(invalid(
            "polynomial features need scalar inputs when degree > 0",
        ));
    }
    Ok(DMatrix::from_fn(ds.len(), degree + 1, |i, j| {
        ds.inputs[i][0].powi(j as i32)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_basis() {
        let ds = Dataset::scalar(&[1.0, 2.0, 5.0], &[0.0; 3]).unwrap();
        let x = featurize(&ds, 0).unwrap();
        assert_eq!(x.ncols(), 1);
        assert!(x.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn linear_row() {
        let ds = Dataset::scalar(&[3.0, 4.0], &[0.0; 2]).unwrap();
        let x = featurize(&ds, 1).unwrap();
        assert_eq!((x[(0, 0)], x[(0, 1)]), (1.0, 3.0));
        assert_eq!(featurize(&ds, 4).unwrap().ncols(), 5);
    }

    #[test]
    fn vector_inputs_need_degree_zero() {
        let ds = Dataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.0, 1.0]).unwrap();
        assert!(featurize(&ds, 1).is_err());
        assert_eq!(featurize(&ds, 0).unwrap().ncols(), 1);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::scalar(&[1.0], &[1.0]).is_err());
        assert!(Dataset::scalar(&[1.0, 2.0], &[1.0]).is_err());
        assert!(Dataset::scalar(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
