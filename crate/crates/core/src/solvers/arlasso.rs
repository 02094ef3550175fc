//! The adaptively regularized Lasso: squared loss plus a squared-l1 and a
//! linear-l1 penalty on the non-exempt coordinates, solved by accelerated
//! proximal gradient. The prox of `a u^2 + b u` composed with the l1 norm is
//! computed exactly by a kink search over the shrinkage amount.

use std::collections::BTreeSet;

use nalgebra::linalg::SVD;

use crate::error::{Error, Result};
use crate::solvers::{soft_threshold, spectral_norm_sq, FitReport, SolverConfig};
use crate::{Matrix, Vector};

/// Shrinkage `theta` solving `theta = gamma (2 a s(theta) + b)` where
/// `s(theta) = sum_i (|z_i| - theta)_+`. Since `s` is piecewise linear and
/// nonincreasing the fixed point is unique; we locate its segment exactly.
fn shrinkage_amount(abs_sorted_desc: &[f64], prefix: &[f64], gamma: f64, a: f64, b: f64) -> f64 {
    let n = abs_sorted_desc.len();
    if a == 0.0 {
        return gamma * b;
    }
    // On [z_(k+1), z_(k)] (descending order, z_(0) = +inf): s(theta) = P_k - k theta.
    for k in 0..=n {
        let pk = prefix[k];
        let theta = (2.0 * gamma * a * pk + gamma * b) / (1.0 + 2.0 * gamma * a * k as f64);
        let hi = if k == 0 { f64::INFINITY } else { abs_sorted_desc[k - 1] };
        let lo = if k == n { 0.0 } else { abs_sorted_desc[k] };
        if theta >= lo - 1e-15 && theta <= hi + 1e-15 {
            return theta.max(0.0);
        }
    }
    gamma * b
}

/// `argmin ||Xv - y||^2 + a ||v_{S^c}||_1^2 + b ||v_{S^c}||_1` where `S` is
/// the exempt set. With `S = [n]` the problem degenerates to least squares and
/// the minimum-norm solution is returned.
pub fn regularized_squared_lasso(
    x: &Matrix,
    y: &Vector,
    exempt: &BTreeSet<usize>,
    a: f64,
    b: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let (m, n) = (x.nrows(), x.ncols());
    if y.len() != m {
        return Err(Error::dim(format!("y has {} entries, X has {m} rows", y.len())));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::arg("regularization coefficients must be nonnegative"));
    }
    if let Some(&bad) = exempt.iter().find(|&&i| i >= n) {
        return Err(Error::arg(format!("exempt index {bad} out of range")));
    }

    let penalized: Vec<usize> = (0..n).filter(|i| !exempt.contains(i)).collect();

    // Fully exempt: plain least squares, min-norm tie-break via pseudoinverse.
    if penalized.is_empty() || (a == 0.0 && b == 0.0) {
        let svd = SVD::new(x.clone(), true, true);
        let v = svd
            .solve(y, 1e-12)
            .map_err(|e| Error::arg(format!("least-squares solve failed: {e}")))?;
        let obj = (x * &v - y).norm_squared();
        let mut rep = FitReport::new(v, obj, 0, true);
        rep.solve_secs = start.elapsed().as_secs_f64();
        return Ok(rep);
    }

    let objective = |v: &Vector| -> f64 {
        let u: f64 = penalized.iter().map(|&i| v[i].abs()).sum();
        (x * v - y).norm_squared() + a * u * u + b * u
    };

    let lip = 2.0 * spectral_norm_sq(x) * 1.02 + 1e-12;
    let gamma = 1.0 / lip;

    let prox = |w: &Vector| -> Vector {
        let mut abs: Vec<f64> = penalized.iter().map(|&i| w[i].abs()).collect();
        abs.sort_by(|p, q| q.total_cmp(p));
        let mut prefix = vec![0.0; abs.len() + 1];
        for (i, &z) in abs.iter().enumerate() {
            prefix[i + 1] = prefix[i] + z;
        }
        let theta = shrinkage_amount(&abs, &prefix, gamma, a, b);
        let mut out = w.clone();
        for &i in &penalized {
            out[i] = soft_threshold(w[i], theta);
        }
        out
    };

    // FISTA with function-value restart.
    let mut v = Vector::zeros(n);
    let mut z = v.clone();
    let mut tk = 1.0f64;
    let mut f_prev = objective(&v);
    let mut best = (f_prev, v.clone());
    let mut stall = 0usize;
    let mut converged = false;
    let mut iterations = cfg.max_iter;

    for it in 0..cfg.max_iter {
        let grad = x.transpose() * (x * &z - y) * 2.0;
        let v_next = prox(&(&z - &grad * gamma));
        let f_next = objective(&v_next);

        if f_next > f_prev {
            // restart momentum
            tk = 1.0;
            z = v.clone();
            let grad = x.transpose() * (x * &z - y) * 2.0;
            let v_r = prox(&(&z - &grad * gamma));
            let f_r = objective(&v_r);
            v = v_r;
            f_prev = f_r;
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
            z = &v_next + (&v_next - &v) * ((tk - 1.0) / t_next);
            tk = t_next;
            v = v_next;
            f_prev = f_next;
        }

        if f_prev < best.0 {
            if best.0 - f_prev <= 0.1 * cfg.obj_tol * (1.0 + f_prev.abs()) {
                stall += 1;
            } else {
                stall = 0;
            }
            best = (f_prev, v.clone());
        } else {
            stall += 1;
        }
        if stall >= 30 {
            converged = true;
            iterations = it + 1;
            break;
        }
    }

    let (obj, v_hat) = best;
    let mut rep = FitReport::new(v_hat, obj, iterations, converged);
    rep.solve_secs = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Adaptively regularized Lasso. The caller passes `lambda_high`
/// (`lambda_{n-d_h}` of the covariance) and the exempt set from peeling; the
/// objective is
/// `||Xv - y||^2 + 8 lambda_high log(12n/delta) ||v_{S^c}||_1^2
///  + 2 sqrt(2 lambda_high log(12n/delta)) [||y||_2] ||v_{S^c}||_1`,
/// the `||y||_2` factor controlled by `cfg.use_y_norm_factor`.
pub fn adaptively_regularized_lasso(
    lambda_high: f64,
    x: &Matrix,
    y: &Vector,
    exempt: &BTreeSet<usize>,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    if lambda_high < 0.0 {
        return Err(Error::arg(format!("lambda_high must be nonnegative, got {lambda_high}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg("delta must lie in (0, 1)"));
    }
    let n = x.ncols();
    let log_term = (12.0 * n as f64 / delta).ln();
    let a = 8.0 * lambda_high * log_term;
    let y_factor = if cfg.use_y_norm_factor { y.norm() } else { 1.0 };
    let b = 2.0 * (2.0 * lambda_high * log_term).sqrt() * y_factor;
    let mut rep = regularized_squared_lasso(x, y, exempt, a, b, cfg)?;
    rep.note = Some(format!(
        "arlasso a={a:.6e} b={b:.6e} y_norm_factor={}",
        cfg.use_y_norm_factor
    ));
    Ok(rep)
}
