//! Iterative spectral peeling: finds the set of coordinates participating in
//! sparse approximate dependencies of the covariance.
//!
//! The procedure projects onto the top `n - d` eigenspaces, seeds with the
//! coordinates whose diagonal projection mass is depleted, and then runs `t`
//! rounds in which every coordinate that correlates with the span of the
//! already-discovered projection columns is added.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{eig, gram_schmidt_general, projection_top, EigenDecomp, SymMatrix};
use crate::tol::Tolerances;
use crate::Vector;

/// Output of [`iterative_peeling`].
#[derive(Debug, Clone)]
pub struct PeelResult {
    /// Final peeled set `S = K_0`.
    pub s: BTreeSet<usize>,
    /// `chain[j]` is `K_{t-j}`, so the list runs `K_t ⊆ ... ⊆ K_0` and has
    /// exactly `t + 1` entries; the last equals `s`.
    pub chain: Vec<BTreeSet<usize>>,
    /// The projection onto the top `n - d` eigenspaces that drove the run.
    pub projection: SymMatrix,
    pub d: usize,
    pub t: usize,
    /// `lambda_{d+1}`; the guarantee scales with its inverse square root.
    pub lambda_after_d: f64,
    /// Set when `lambda_{d+1} <= 0`, which makes the norm guarantee vacuous.
    pub vacuous: bool,
}

impl PeelResult {
    /// Certified cardinality bound `(7t)^{2t+1} d`.
    pub fn size_bound(&self) -> f64 {
        (7.0 * self.t as f64).powi(2 * self.t as i32 + 1) * self.d as f64
    }
}

/// Coordinates `i` with `sup_{x in V} |x_i| / ||x||_2 >= alpha`, where `V` is
/// the span of the input vectors. Computed via Euclidean Gram-Schmidt: the
/// supremum equals the i-th row norm of the orthonormal basis matrix, so the
/// set is `{ i : sum_j a_j[i]^2 >= alpha^2 }`. Guarantees `|S| <= dim(V) / alpha^2`.
pub fn find_heavy_coordinates(vectors: &[Vector], alpha: f64) -> Result<BTreeSet<usize>> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::arg(format!("alpha must be positive, got {alpha}")));
    }
    if vectors.is_empty() {
        return Err(Error::arg("find_heavy_coordinates needs at least one vector"));
    }
    let tol = Tolerances::DEFAULT;
    let gs = gram_schmidt_general(vectors, |a, b| a.dot(b), &tol)?;
    let n = vectors[0].len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        let mut mass = 0.0;
        for (img, &zero) in gs.images.iter().zip(gs.zero.iter()) {
            if !zero {
                mass += img[i] * img[i];
            }
        }
        if mass >= alpha * alpha {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Runs the full peeling procedure on `sigma` with small-outlier count `d`
/// and sparsity `t`.
pub fn iterative_peeling(sigma: &SymMatrix, d: usize, t: usize) -> Result<PeelResult> {
    let e = eig(sigma)?;
    peel_from_eigen(&e, d, t)
}

/// Peeling from a precomputed eigendecomposition; callers that also need the
/// spectrum avoid paying for a second factorization.
pub fn peel_from_eigen(e: &EigenDecomp, d: usize, t: usize) -> Result<PeelResult> {
    let n = e.n();
    if d > n {
        return Err(Error::arg(format!("d = {d} exceeds n = {n}")));
    }
    if t == 0 {
        return Err(Error::arg("t must be at least 1"));
    }
    let p = projection_top(e, d)?;
    let lambda_after_d = if d < n { e.eigenvalues[d] } else { 0.0 };
    let lambda_max = e.eigenvalues[n - 1].abs();
    let vacuous = lambda_after_d <= 1e-12 * f64::max(1.0, lambda_max);

    let tf = t as f64;
    let seed_threshold = 1.0 - 1.0 / (9.0 * tf * tf);
    let mut k: BTreeSet<usize> = (0..n)
        .filter(|&i| p.get(i, i) < seed_threshold)
        .collect();

    let mut chain = Vec::with_capacity(t + 1);
    chain.push(k.clone());

    let round_alpha = 1.0 / (6.0 * tf);
    for _round in 0..t {
        if !k.is_empty() {
            let cols: Vec<Vector> = k.iter().map(|&i| p.as_matrix().column(i).into_owned()).collect();
            let heavy = find_heavy_coordinates(&cols, round_alpha)?;
            k.extend(heavy);
        }
        chain.push(k.clone());
    }

    Ok(PeelResult {
        s: k,
        chain,
        projection: p,
        d,
        t,
        lambda_after_d,
        vacuous,
    })
}
