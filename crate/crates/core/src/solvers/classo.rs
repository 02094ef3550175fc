//! l1-ball-constrained least squares by projected accelerated gradient.

use crate::error::{Error, Result};
use crate::solvers::{spectral_norm_sq, FitReport, SolverConfig};
use crate::{Matrix, Vector};

/// Euclidean projection onto `{w : ||w||_1 <= radius}` (sort-based).
pub(crate) fn project_l1_ball(w: &Vector, radius: f64) -> Vector {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return w.clone();
    }
    if radius <= 0.0 {
        return Vector::zeros(w.len());
    }
    let mut abs: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &z) in abs.iter().enumerate() {
        acc += z;
        let candidate = (acc - radius) / (k as f64 + 1.0);
        if k + 1 == abs.len() || abs[k + 1] <= candidate {
            tau = candidate;
            break;
        }
    }
    Vector::from_iterator(
        w.len(),
        w.iter().map(|&v| v.signum() * (v.abs() - tau).max(0.0)),
    )
}

/// `argmin_{||w||_1 <= radius} ||Xw - y||^2`.
pub fn constrained_lasso(
    x: &Matrix,
    y: &Vector,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    if radius < 0.0 {
        return Err(Error::arg(format!("radius must be nonnegative, got {radius}")));
    }
    let (m, n) = (x.nrows(), x.ncols());
    if y.len() != m {
        return Err(Error::dim(format!("y has {} entries, X has {m} rows", y.len())));
    }
    if radius == 0.0 {
        let mut rep = FitReport::new(Vector::zeros(n), y.norm_squared(), 0, true);
        rep.solve_secs = start.elapsed().as_secs_f64();
        return Ok(rep);
    }

    let lip = 2.0 * spectral_norm_sq(x) * 1.02 + 1e-12;
    let gamma = 1.0 / lip;
    let objective = |w: &Vector| (x * w - y).norm_squared();

    let mut w = Vector::zeros(n);
    let mut z = w.clone();
    let mut tk = 1.0f64;
    let mut f_prev = objective(&w);
    let mut best = (f_prev, w.clone());
    let mut stall = 0usize;
    let mut converged = false;
    let mut iterations = cfg.max_iter;

    for it in 0..cfg.max_iter {
        let grad = x.transpose() * (x * &z - y) * 2.0;
        let w_next = project_l1_ball(&(&z - &grad * gamma), radius);
        let f_next = objective(&w_next);
        if f_next > f_prev {
            tk = 1.0;
            z = w.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
            z = &w_next + (&w_next - &w) * ((tk - 1.0) / t_next);
            tk = t_next;
            w = w_next;
            f_prev = f_next;
        }
        if f_prev < best.0 {
            if best.0 - f_prev <= 0.1 * cfg.obj_tol * (1.0 + f_prev.abs()) {
                stall += 1;
            } else {
                stall = 0;
            }
            best = (f_prev, w.clone());
        } else {
            stall += 1;
        }
        if stall >= 30 {
            converged = true;
            iterations = it + 1;
            break;
        }
    }

    let (obj, w_hat) = best;
    let mut rep = FitReport::new(w_hat, obj, iterations, converged);
    rep.solve_secs = start.elapsed().as_secs_f64();
    Ok(rep)
}
