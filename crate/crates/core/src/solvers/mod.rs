//! Convex programs and finite-selection estimators: basis pursuit (plain and
//! with an exempt coordinate set), the adaptively regularized Lasso,
//! l1-ball-constrained least squares, mirror-descent Lasso, weak-learner
//! selection, and holdout model selection.

mod arlasso;
mod bp;
mod classo;
mod mirror;
mod select;

pub use arlasso::{adaptively_regularized_lasso, regularized_squared_lasso};
pub use bp::{basis_pursuit, weighted_basis_pursuit};
pub use classo::constrained_lasso;
pub use mirror::mirror_descent_lasso;
pub use select::{finite_model_selection, weak_learner_select};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::{Matrix, Vector};

/// Iteration limits and tolerances shared by the first-order solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative objective tolerance.
    pub obj_tol: f64,
    /// Equality-constraint residual tolerance, relative to `1 + ||y||`.
    pub feas_tol: f64,
    /// Initial ADMM penalty parameter.
    pub rho: f64,
    /// Include the `||y||_2` factor on the linear regularization term of the
    /// adaptively regularized Lasso.
    pub use_y_norm_factor: bool,
    /// Multiplier on the mirror-descent step size.
    pub md_step_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 200_000,
            obj_tol: 1e-8,
            feas_tol: 1e-8,
            rho: 1.0,
            use_y_norm_factor: true,
            md_step_scale: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.obj_tol <= 0.0 || self.feas_tol <= 0.0 {
            return Err(Error::arg("solver tolerances must be positive"));
        }
        Ok(())
    }

    pub fn with_max_iter(mut self, it: usize) -> Self {
        self.max_iter = it;
        self
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub v_hat: Vector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `||v_hat - v*||_Sigma^2` when the ground truth was supplied.
    pub excess_risk: Option<f64>,
    pub seed: Option<u64>,
    pub solve_secs: f64,
    /// Free-form solver note (e.g. which regularizer variant ran).
    pub note: Option<String>,
}

impl FitReport {
    pub fn new(v_hat: Vector, objective: f64, iterations: usize, converged: bool) -> Self {
        FitReport {
            v_hat,
            objective,
            iterations,
            converged,
            excess_risk: None,
            seed: None,
            solve_secs: 0.0,
            note: None,
        }
    }

    /// Fills in `||v_hat - v*||_Sigma^2`.
    pub fn with_excess_risk(mut self, sigma: &SymMatrix, v_star: &Vector) -> Result<Self> {
        let diff = &self.v_hat - v_star;
        self.excess_risk = Some(sigma.quad_form(&diff)?);
        Ok(self)
    }
}

/// Exempt-set helper: 1.0 weight off the set, 0.0 on it.
pub(crate) fn exempt_weights(n: usize, exempt: &BTreeSet<usize>) -> Result<Vec<f64>> {
    if let Some(&bad) = exempt.iter().find(|&&i| i >= n) {
        return Err(Error::arg(format!("exempt index {bad} out of range for n = {n}")));
    }
    Ok((0..n).map(|i| if exempt.contains(&i) { 0.0 } else { 1.0 }).collect())
}

/// Largest squared singular value of `x`, by power iteration on `X'X`.
/// Deterministic start; a small safety margin is applied by callers that use
/// it as a Lipschitz constant.
pub(crate) fn spectral_norm_sq(x: &Matrix) -> f64 {
    let n = x.ncols();
    if n == 0 || x.nrows() == 0 {
        return 0.0;
    }
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..200 {
        let xv = x * &v;
        let mut w = x.transpose() * xv;
        let nw = w.norm();
        if nw <= 1e-300 {
            return 0.0;
        }
        w /= nw;
        let xw = x * &w;
        let new_lam = xw.norm_squared();
        if (new_lam - lam).abs() <= 1e-12 * f64::max(1.0, new_lam) {
            return new_lam;
        }
        lam = new_lam;
        v = w;
    }
    lam
}

pub(crate) fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_matches_svd() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 0.5, -1.0, 3.0, 0.0]);
        let s = spectral_norm_sq(&x);
        let svd = x.clone().svd(false, false);
        let top = svd.singular_values[0];
        assert!((s - top * top).abs() <= 1e-8 * top * top);
    }

    #[test]
    fn soft_threshold_basics() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }
}
