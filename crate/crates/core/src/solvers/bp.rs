//! Basis pursuit by operator splitting (ADMM) on the split-variable form,
//! with per-coordinate weights so the same routine serves the exempt-set
//! variant and the weighted-l1 representation-cost program.

use std::collections::BTreeSet;

use nalgebra::linalg::SVD;

use crate::error::{Error, Result};
use crate::solvers::{exempt_weights, soft_threshold, FitReport, SolverConfig};
use crate::{Matrix, Vector};

/// `argmin sum_i w_i |v_i|  s.t.  X v = y`.
///
/// Weights must be nonnegative; zero-weight coordinates are free. Returns the
/// feasible iterate, so `||X v_hat - y|| <= feas_tol (1 + ||y||)` always holds
/// on success. Infeasible systems are detected from the least-squares
/// residual before iterating.
pub fn weighted_basis_pursuit(
    x: &Matrix,
    y: &Vector,
    weights: &[f64],
    cfg: &SolverConfig,
) -> Result<FitReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let (m, n) = (x.nrows(), x.ncols());
    if y.len() != m {
        return Err(Error::dim(format!("y has {} entries, X has {} rows", y.len(), m)));
    }
    if weights.len() != n {
        return Err(Error::dim(format!(
            "{} weights for {} columns",
            weights.len(),
            n
        )));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::arg("weights must be finite and nonnegative"));
    }

    // Scale-normalize the right-hand side; solutions scale linearly with y.
    let y_scale = f64::max(y.norm(), 1e-12);
    let ys = y / y_scale;

    let svd = SVD::new(x.clone(), true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank_tol = smax * (m.max(n) as f64) * f64::EPSILON;
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_tol)
        .count();

    // Least-norm feasible point v0 = X^+ y and feasibility check.
    let uty = u.transpose() * &ys;
    let mut coeff = Vector::zeros(rank);
    for i in 0..rank {
        coeff[i] = uty[i] / svd.singular_values[i];
    }
    let vr = vt.rows(0, rank).transpose(); // n x rank
    let v0 = &vr * &coeff;
    let feas_resid = (x * &v0 - &ys).norm();
    let feas_limit = cfg.feas_tol * (1.0 + ys.norm());
    if feas_resid > feas_limit {
        return Err(Error::Infeasible {
            residual: feas_resid * y_scale,
            tol: cfg.feas_tol * (1.0 + y.norm()),
        });
    }

    let finish = |v: Vector, iterations: usize, converged: bool| -> FitReport {
        let v = v * y_scale;
        let obj: f64 = v.iter().zip(weights).map(|(vi, w)| w * vi.abs()).sum();
        let mut rep = FitReport::new(v, obj, iterations, converged);
        rep.solve_secs = start.elapsed().as_secs_f64();
        rep
    };

    // Full column rank: the feasible set is a single point.
    if rank == n {
        return Ok(finish(v0, 0, true));
    }

    // ADMM: v-step projects onto the affine set, z-step soft-thresholds.
    // Projection onto {Xv = ys}: v - Vr Vr' v + v0.
    let project = |w: &Vector| -> Vector {
        let c = vr.transpose() * w;
        w - &vr * c + &v0
    };

    let mut rho = cfg.rho;
    let mut v = v0.clone();
    let mut z = v.clone();
    let mut uu = Vector::zeros(n);
    let mut best_obj = f64::INFINITY;
    let mut best_v = v.clone();
    let mut stall = 0usize;
    let mut converged = false;
    let mut iterations = cfg.max_iter;

    for it in 0..cfg.max_iter {
        v = project(&(&z - &uu));
        let z_old = z.clone();
        for i in 0..n {
            z[i] = soft_threshold(v[i] + uu[i], weights[i] / rho);
        }
        uu += &v - &z;

        let obj: f64 = v.iter().zip(weights).map(|(vi, w)| w * vi.abs()).sum();
        if obj < best_obj - 1e-300 {
            best_obj = obj;
            best_v = v.clone();
        }

        let r_norm = (&v - &z).norm();
        let s_norm = rho * (&z - &z_old).norm();
        let eps = cfg.obj_tol * f64::max(1.0, f64::max(v.norm(), z.norm()));
        if r_norm <= eps && s_norm <= eps {
            stall += 1;
            if stall >= 10 {
                converged = true;
                iterations = it + 1;
                break;
            }
        } else {
            stall = 0;
        }

        // Residual balancing keeps the two ADMM residuals comparable.
        if it % 50 == 49 {
            if r_norm > 10.0 * s_norm {
                rho *= 2.0;
                uu /= 2.0;
            } else if s_norm > 10.0 * r_norm {
                rho /= 2.0;
                uu *= 2.0;
            }
        }
    }

    let v_final = if best_obj.is_finite() { best_v } else { v };

    // Support polish: re-solve the equality constraint restricted to a few
    // candidate supports and keep the best feasible point. This snaps the
    // first-order iterate onto an exact vertex. Candidates: the sparse
    // iterate's support, the feasible iterate's numerically-large support,
    // and the free coordinates alone.
    let weighted_obj =
        |p: &Vector| -> f64 { p.iter().zip(weights).map(|(vi, w)| w * vi.abs()).sum() };
    let scale = v_final.amax().max(1e-12);
    let free: Vec<usize> = (0..n).filter(|&i| weights[i] == 0.0).collect();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut from_z: Vec<usize> = (0..n)
        .filter(|&i| weights[i] == 0.0 || z[i] != 0.0)
        .collect();
    from_z.sort_unstable();
    candidates.push(from_z);
    candidates.push(
        (0..n)
            .filter(|&i| weights[i] == 0.0 || v_final[i].abs() > 1e-7 * scale)
            .collect(),
    );
    if !free.is_empty() {
        candidates.push(free);
    }
    let mut v_best = v_final;
    let mut obj_best = weighted_obj(&v_best);
    for support in candidates {
        if let Some(p) = polish_on_support(x, &ys, &support, n) {
            if (x * &p - &ys).norm() <= feas_limit {
                let obj_p = weighted_obj(&p);
                if obj_p < obj_best {
                    obj_best = obj_p;
                    v_best = p;
                }
            }
        }
    }

    Ok(finish(v_best, iterations, converged))
}

fn polish_on_support(x: &Matrix, ys: &Vector, support: &[usize], n: usize) -> Option<Vector> {
    if support.is_empty() {
        return None;
    }
    let mut xs = Matrix::zeros(x.nrows(), support.len());
    for (c, &i) in support.iter().enumerate() {
        xs.set_column(c, &x.column(i));
    }
    let svd = SVD::new(xs.clone(), true, true);
    let sol = svd.solve(ys, 1e-12).ok()?;
    let mut v = Vector::zeros(n);
    for (c, &i) in support.iter().enumerate() {
        v[i] = sol[c];
    }
    Some(v)
}

/// Basis pursuit with an exempt set: `argmin_{Xv = y} sum_{i not in S} |v_i|`.
/// `S = {}` is plain basis pursuit.
pub fn basis_pursuit(
    x: &Matrix,
    y: &Vector,
    exempt: &BTreeSet<usize>,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    let weights = exempt_weights(x.ncols(), exempt)?;
    weighted_basis_pursuit(x, y, &weights, cfg)
}
