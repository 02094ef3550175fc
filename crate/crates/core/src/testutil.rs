//! Shared helpers for unit and integration tests. Not part of the public API
//! surface proper, but exported so the acceptance suite can reuse the same
//! deterministic generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::SymMatrix;
use crate::rng::rng_for;
use crate::{Matrix, Vector};

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * f64::max(1.0, f64::max(a.abs(), b.abs()))
}

pub fn frob_dist(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm()
}

/// Random PSD matrix `A A'` with standard normal `A` (n x n).
pub fn random_psd(n: usize, seed: u64) -> SymMatrix {
    let mut rng = rng_for(seed, 0);
    let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let p = &a * a.transpose();
    SymMatrix::from_symmetric_unchecked((&p + p.transpose()) * 0.5)
}

/// Random PSD matrix with a prescribed condition number: eigenvalues log-spaced
/// in `[lambda_max / cond, lambda_max]` under a random orthogonal basis.
pub fn random_psd_with_condition(n: usize, cond: f64, seed: u64) -> SymMatrix {
    let mut rng = rng_for(seed, 1);
    let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let q = qr.q();
    let lmax = 1.0;
    let lmin = lmax / cond;
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        d[(i, i)] = lmin * (lmax / lmin).powf(t);
    }
    let m = &q * d * q.transpose();
    SymMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
}

/// Random unit vector.
pub fn random_unit(n: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let nrm = v.norm();
        if nrm > 1e-12 {
            return v / nrm;
        }
    }
}

/// Random t-sparse vector: support uniform over C(n, t), standard normal
/// coefficients.
pub fn random_sparse(n: usize, t: usize, rng: &mut impl Rng) -> Vector {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..t {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut v = Vector::zeros(n);
    for &i in idx.iter().take(t) {
        v[i] = rng.sample::<f64, _>(StandardNormal);
    }
    v
}
