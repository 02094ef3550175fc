//! Synthetic covariance generators: planted sparse approximate dependencies
//! and the coupled-triplet benchmark instances. Every covariance is built in
//! closed form, never estimated from samples.

use crate::error::{Error, Result};
use crate::linalg::{eig, SymMatrix};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// A covariance with known ground truth regressor.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub sigma: SymMatrix,
    pub v_star: Vector,
    /// Sparsity of `v_star`.
    pub t: usize,
    /// Number of planted small-eigenvalue dependencies.
    pub d_l: usize,
    pub description: String,
    pub seed: u64,
}

impl PlantedInstance {
    pub fn n(&self) -> usize {
        self.sigma.n()
    }

    /// `||v*||_Sigma^2`, the signal variance.
    pub fn signal_energy(&self) -> f64 {
        self.sigma.quad_form(&self.v_star).unwrap()
    }
}

/// One planted dependency: the combination `sum_i coefficients[i] * X_{support[i]}`
/// gets variance exactly `residual_var`.
#[derive(Debug, Clone)]
pub struct PlantedDep {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual_var: f64,
}

/// Builds `Sigma = base * (I - P_V) + A` where `V` spans the embedded
/// dependency combinations and `A` is the PSD matrix on `V` that gives each
/// listed combination exactly its prescribed residual variance (and makes
/// distinct dependencies uncorrelated). Errors when the combinations are
/// linearly dependent or any parameter makes the result non-PSD.
pub fn gen_planted_dependencies(
    n: usize,
    deps: &[PlantedDep],
    base_variance: f64,
    v_star: Vector,
    seed: u64,
) -> Result<PlantedInstance> {
    if base_variance <= 0.0 {
        return Err(Error::arg("base variance must be positive"));
    }
    if v_star.len() != n {
        return Err(Error::dim(format!(
            "v* has length {}, expected {n}",
            v_star.len()
        )));
    }
    for dep in deps {
        if dep.support.len() != dep.coefficients.len() {
            return Err(Error::dim(
                "dependency support and coefficient lists differ in length",
            ));
        }
        if dep.support.iter().any(|&i| i >= n) {
            return Err(Error::arg("dependency support index out of range"));
        }
        if dep.residual_var < 0.0 {
            return Err(Error::arg("residual variance must be nonnegative"));
        }
    }

    let k = deps.len();
    let sigma = if k == 0 {
        SymMatrix::scaled_identity(n, base_variance)
    } else {
        // Embed combination vectors as columns of U.
        let mut u = Matrix::zeros(n, k);
        for (d, dep) in deps.iter().enumerate() {
            for (idx, &i) in dep.support.iter().enumerate() {
                u[(i, d)] += dep.coefficients[idx];
            }
        }
        let gram = u.transpose() * &u;
        let gram_inv = gram.clone().try_inverse().ok_or_else(|| {
            Error::arg("planted dependency combinations are linearly dependent")
        })?;
        // P_V = U G^{-1} U'
        let p_v = &u * &gram_inv * u.transpose();
        // A = U G^{-1} diag(residual) G^{-1} U' pins each combination's variance.
        let mut resid = Matrix::zeros(k, k);
        for (d, dep) in deps.iter().enumerate() {
            resid[(d, d)] = dep.residual_var;
        }
        let a = &u * &gram_inv * resid * &gram_inv * u.transpose();
        let m = (Matrix::identity(n, n) - &p_v) * base_variance + a;
        SymMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
    };

    // PSD audit.
    let e = eig(&sigma)?;
    let lmax = e.eigenvalues[n - 1].abs().max(1.0);
    if e.eigenvalues[0] < -Tolerances::DEFAULT.psd * lmax {
        return Err(Error::NotPsd {
            min_eig: e.eigenvalues[0],
            tol: Tolerances::DEFAULT.psd * lmax,
        });
    }

    let t = v_star.iter().filter(|v| **v != 0.0).count();
    Ok(PlantedInstance {
        sigma,
        v_star,
        t,
        d_l: k,
        description: format!("planted: n={n}, deps={k}, base={base_variance}"),
        seed,
    })
}

/// 3x3 covariance of a coupled triplet `(Z_a, Z_a + 0.4 Z_b, Z_b + 0.4 Z_c)`.
fn triplet_block() -> [[f64; 3]; 3] {
    [[1.0, 1.0, 0.0], [1.0, 1.16, 0.4], [0.0, 0.4, 1.16]]
}

/// Benchmark instance with coupled triplets: `n` covariates, the first
/// `3 * n_triplets` arranged in disjoint triplets with the 0.4 couplings, the
/// rest independent standard normal. The response weights the first triplet
/// by `(6.25, -6.25, 2.5)` and spreads `1/sqrt(n_triplets)` over the last
/// `n_triplets` coordinates.
pub fn gen_figure_instance(n: usize, n_triplets: usize, seed: u64) -> Result<PlantedInstance> {
    if n_triplets == 0 {
        return Err(Error::arg("need at least one triplet"));
    }
    if n < 4 * n_triplets {
        return Err(Error::arg(format!(
            "n = {n} too small for {n_triplets} triplets plus the tail block"
        )));
    }
    let mut m = Matrix::identity(n, n);
    let block = triplet_block();
    for tr in 0..n_triplets {
        let base = 3 * tr;
        for i in 0..3 {
            for j in 0..3 {
                m[(base + i, base + j)] = block[i][j];
            }
        }
    }
    let sigma = SymMatrix::from_symmetric_unchecked(m);

    let mut v_star = Vector::zeros(n);
    v_star[0] = 6.25;
    v_star[1] = -6.25;
    v_star[2] = 2.5;
    let tail = n_triplets;
    let w = 1.0 / (tail as f64).sqrt();
    for i in (n - tail)..n {
        v_star[i] = w;
    }
    let t = 3 + tail;
    Ok(PlantedInstance {
        sigma,
        v_star,
        t,
        d_l: n_triplets,
        description: format!("figure: n={n}, triplets={n_triplets}"),
        seed,
    })
}

/// Full-size coupled-triplet benchmark: 10 triplets among 1000 covariates,
/// 13-sparse ground truth. `scale` shrinks the template proportionally
/// (`scale = 0.2` gives n = 200 with 2 triplets and a 5-sparse truth).
pub fn gen_figure1_instance(scale: f64, seed: u64) -> Result<PlantedInstance> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::arg("scale must lie in (0, 1]"));
    }
    let n = (1000.0 * scale).round() as usize;
    let triplets = ((10.0 * scale).round() as usize).max(1);
    gen_figure_instance(n, triplets, seed)
}

/// Single-triplet variant: covariates independent except one coupled triplet
/// in the first three coordinates; the ground truth is `(6.25, -6.25, 2.5)`.
pub fn gen_suppfig_instance(n: usize, seed: u64) -> Result<PlantedInstance> {
    if n < 4 {
        return Err(Error::arg(format!("n = {n} too small, need at least 4")));
    }
    let mut m = Matrix::identity(n, n);
    let block = triplet_block();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = block[i][j];
        }
    }
    let sigma = SymMatrix::from_symmetric_unchecked(m);
    let mut v_star = Vector::zeros(n);
    v_star[0] = 6.25;
    v_star[1] = -6.25;
    v_star[2] = 2.5;
    Ok(PlantedInstance {
        sigma,
        v_star,
        t: 3,
        d_l: 1,
        description: format!("suppfig: n={n}"),
        seed,
    })
}
