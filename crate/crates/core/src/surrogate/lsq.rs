use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// A column whose component orthogonal to the preceding columns is below
/// this fraction of its own norm makes the design rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub r_squared: f64,
    pub f_statistic: f64,
    pub p_value: f64,
    pub dof_model: usize,
    pub dof_residual: usize,
    /// Wald–Wolfowitz runs statistic on the residual signs.
    pub runs_test_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    /// Residual-plot data as `predicted,residual` CSV.
    pub fn residual_csv(&self) -> String {
        let mut out = String::from("predicted,residual\n");
        for (p, r) in self.fitted.iter().zip(&self.residuals) {
            let _ = writeln!(out, "{p},{r}");
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let d = &self.diagnostics;
        serde_json::json!({
            "coefficients": self.coefficients,
            "r_squared": d.r_squared,
            "f_statistic": d.f_statistic,
            "p_value": d.p_value,
            "dof_model": d.dof_model,
            "dof_residual": d.dof_residual,
            "runs_test_z": d.runs_test_z,
        })
    }
}

/// Least squares through a Householder QR factorization of the design.
pub fn fit_least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<FitResult> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(crate::error::invalid(format!(
            "design has {n} rows but {} targets",
            y.len()
        )));
    }
    if n < p || p == 0 {
        return Err(Error::InsufficientData {
            observations: n,
            parameters: p,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..p {
        let norm = x.column(j).norm();
        if r[(j, j)].abs() <= RANK_TOL * norm || norm == 0.0 {
            return Err(Error::SingularFit { column: j });
        }
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let coef = r
        .solve_upper_triangular(&qty.rows(0, p).into_owned())
        .ok_or(Error::SingularFit { column: p - 1 })?;
    let fitted = x * &coef;
    let fitted: Vec<f64> = fitted.iter().copied().collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let diagnostics = if n > p {
        residual_report(y, &fitted, p)?
    } else {
        // Square systems interpolate; there are no residual degrees of freedom.
        Diagnostics {
            r_squared: r_squared(y, &fitted),
            f_statistic: f64::NAN,
            p_value: 1.0,
            dof_model: p - 1,
            dof_residual: 0,
            runs_test_z: 0.0,
        }
    };
    Ok(FitResult {
        coefficients: coef.iter().copied().collect(),
        fitted,
        residuals,
        diagnostics,
    })
}

fn sums_of_squares(y: &[f64], yhat: &[f64]) -> (f64, f64, f64) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let ss_reg = yhat.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss_tot, ss_res, ss_reg)
}

fn r_squared(y: &[f64], yhat: &[f64]) -> f64 {
    let (ss_tot, ss_res, _) = sums_of_squares(y, yhat);
    if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// R², the overall regression F-test, and the residual runs test for a
/// model with `n_model_params` parameters including the intercept.
///
/// Zero total variance gives `R² = 0`, `F = 0`, `p = 1`.
pub fn residual_report(y: &[f64], yhat: &[f64], n_model_params: usize) -> Result<Diagnostics> {
    let n = y.len();
    if yhat.len() != n {
        return Err(crate::error::invalid("targets and predictions differ in length"));
    }
    if n <= n_model_params || n_model_params == 0 {
        return Err(Error::InsufficientData {
            observations: n,
            parameters: n_model_params,
        });
    }
    let k = n_model_params - 1;
    let dof_residual = n - k - 1;
    let (ss_tot, ss_res, ss_reg) = sums_of_squares(y, yhat);
    let residuals: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let (r_squared, f_statistic, p_value) = if ss_tot == 0.0 || k == 0 {
        (r_squared(y, yhat), 0.0, 1.0)
    } else if ss_res == 0.0 {
        (1.0, f64::INFINITY, 0.0)
    } else {
        let f = (ss_reg / k as f64) / (ss_res / dof_residual as f64);
        (1.0 - ss_res / ss_tot, f, f_upper_tail(f, k as f64, dof_residual as f64))
    };
    Ok(Diagnostics {
        r_squared,
        f_statistic,
        p_value,
        dof_model: k,
        dof_residual,
        runs_test_z: runs_test_z(&residuals),
    })
}

/// `P(F > f)` for `F ~ F(d1, d2)`, via `I_{d2/(d2+d1 f)}(d2/2, d1/2)`.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

/// Normal-approximation z score of the number of sign runs in `residuals`.
/// Exact zeros are skipped; zero when either sign is absent.
pub fn runs_test_z(residuals: &[f64]) -> f64 {
    let signs: Vec<bool> = residuals
        .iter()
        .filter(|&&r| r != 0.0)
        .map(|&r| r > 0.0)
        .collect();
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    let n = n1 + n2;
    if n1 == 0.0 || n2 == 0.0 || n < 2.0 {
        return 0.0;
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let mu = 2.0 * n1 * n2 / n + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    if var <= 0.0 {
        return 0.0;
    }
    (runs as f64 - mu) / var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line_design(xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), 2, |i, j| xs[i].powi(j as i32))
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = fit_least_squares(&line_design(&xs), &y).unwrap();
        assert_relative_eq!(fit.coefficients[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficients[1], 2.0, epsilon = 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        assert_relative_eq!(fit.diagnostics.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn four_point_regression() {
        // Normal equations by hand: slope 0.6, intercept 1.1, SS_res 0.2, SS_tot 2.
        let fit = fit_least_squares(&line_design(&[0.0, 1.0, 2.0, 3.0]), &[1.0, 2.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(fit.coefficients[0], 1.1, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficients[1], 0.6, epsilon = 1e-12);
        assert_relative_eq!(fit.diagnostics.r_squared, 0.9, epsilon = 1e-12);
        assert_relative_eq!(fit.diagnostics.f_statistic, 18.0, epsilon = 1e-12);
        assert_eq!((fit.diagnostics.dof_model, fit.diagnostics.dof_residual), (1, 2));
        // F(1, 2) tail: I_{0.1}(1, 1/2) = 1 − √0.9.
        assert_relative_eq!(fit.diagnostics.p_value, 1.0 - 0.9f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn constant_target_convention() {
        let fit = fit_least_squares(&line_design(&[0.0, 1.0, 2.0, 5.0]), &[4.0; 4]).unwrap();
        assert_relative_eq!(fit.coefficients[0], 4.0, epsilon = 1e-12);
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert_eq!(fit.diagnostics.r_squared, 0.0);
        assert_eq!(fit.diagnostics.p_value, 1.0);
    }

    #[test]
    fn rank_deficient_design_names_the_column() {
        let x = DMatrix::from_row_slice(4, 3, &[
            1.0, 0.0, 0.0,
            1.0, 1.0, 2.0,
            1.0, 2.0, 4.0,
            1.0, 3.0, 6.0,
        ]);
        assert_eq!(
            fit_least_squares(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::SingularFit { column: 2 })
        );
        let zero = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(fit_least_squares(&zero, &[1.0, 2.0, 3.0]), Err(Error::SingularFit { column: 1 }));
    }

    #[test]
    fn underdetermined_design_is_rejected() {
        let x = DMatrix::from_element(2, 3, 1.0);
        assert!(matches!(fit_least_squares(&x, &[1.0, 2.0]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn perfect_and_null_predictions() {
        let y = [1.0, 3.0, 2.0, 5.0];
        let d = residual_report(&y, &y, 2).unwrap();
        assert_eq!(d.r_squared, 1.0);
        assert_eq!(d.p_value, 0.0);
        let m = y.iter().sum::<f64>() / 4.0;
        let d = residual_report(&y, &[m; 4], 2).unwrap();
        assert_eq!(d.r_squared, 0.0);
        assert_eq!(d.p_value, 1.0);
        assert!(matches!(residual_report(&y, &y, 4), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn runs_statistic() {
        // Alternating signs: maximal runs, positive z.
        assert!(runs_test_z(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]) > 1.5);
        // Two blocks: minimal runs, negative z.
        assert!(runs_test_z(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]) < -1.5);
        assert_eq!(runs_test_z(&[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn csv_and_json_shapes() {
        let fit = fit_least_squares(&line_design(&[0.0, 1.0, 2.0, 3.0]), &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let csv = fit.residual_csv();
        assert!(csv.starts_with("predicted,residual\n"));
        assert_eq!(csv.lines().count(), 5);
        let json = fit.summary_json();
        for key in ["coefficients", "r_squared", "f_statistic", "p_value", "dof_model", "dof_residual", "runs_test_z"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
