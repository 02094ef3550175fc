//! Dense symmetric linear algebra: validated covariance matrices, spectral
//! factorization, the Sigma-inner-product geometry, Gram-Schmidt under an
//! arbitrary PSD bilinear form, and Gaussian sampling.
//!
//! Eigendecompositions go through nalgebra's symmetric solver (tridiagonal
//! reduction + QR iteration), which is deterministic; we re-sort to ascending
//! eigenvalue order on top of it.


use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

use rand::Rng;
use rand_distr::StandardNormal;

/// A validated dense symmetric matrix. Construction symmetrizes the entries
/// (averaging `A` with its transpose) after checking that the asymmetry is
/// within tolerance, so downstream code may rely on exact symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: Matrix,
}

impl SymMatrix {
    pub fn new(mat: Matrix) -> Result<Self> {
        Self::with_tolerances(mat, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(mat: Matrix, tol: &Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::dim(format!(
                "symmetric matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n = mat.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let dev = (mat[(i, j)] - mat[(j, i)]).abs();
                if dev > tol.symmetry * f64::max(1.0, mat[(i, j)].abs()) {
                    return Err(Error::NotSymmetric { i, j, dev });
                }
            }
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(SymMatrix { mat: sym })
    }

    /// Identity scaled by `c`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        SymMatrix {
            mat: Matrix::identity(n, n) * c,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            mat: Matrix::zeros(n, n),
        }
    }

    /// Wraps a matrix that is symmetric by construction, skipping validation.
    pub(crate) fn from_symmetric_unchecked(mat: Matrix) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        SymMatrix { mat }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        &self.mat * v
    }

    /// `u' A v`.
    pub fn inner(&self, u: &Vector, v: &Vector) -> Result<f64> {
        if u.len() != self.n() || v.len() != self.n() {
            return Err(Error::dim(format!(
                "inner product needs vectors of length {}, got {} and {}",
                self.n(),
                u.len(),
                v.len()
            )));
        }
        Ok((self.mat.column_iter().zip(v.iter()))
            .fold(Vector::zeros(self.n()), |acc, (col, &vi)| acc + col * vi)
            .dot(u))
    }

    /// `v' A v`.
    pub fn quad_form(&self, v: &Vector) -> Result<f64> {
        self.inner(v, v)
    }

    /// `sqrt(v' A v)`, clamping small negative values to zero and rejecting
    /// anything below `-norm_clamp`.
    pub fn norm(&self, v: &Vector) -> Result<f64> {
        let q = self.quad_form(v)?;
        if q < -Tolerances::DEFAULT.norm_clamp * f64::max(1.0, q.abs()) {
            return Err(Error::NotPsd {
                min_eig: q,
                tol: Tolerances::DEFAULT.norm_clamp,
            });
        }
        Ok(q.max(0.0).sqrt())
    }

    /// Checks the PSD flag invariant: every eigenvalue at least
    /// `-psd_tol * |lambda|_max`.
    pub fn assert_psd(&self, tol: &Tolerances) -> Result<EigenDecomp> {
        let e = eig(self)?;
        let max_abs = e
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        let min = e.eigenvalues[0];
        if min < -tol.psd * f64::max(1.0, max_abs) {
            return Err(Error::NotPsd {
                min_eig: min,
                tol: tol.psd * f64::max(1.0, max_abs),
            });
        }
        Ok(e)
    }
}

/// Spectral factorization of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// `lambda_1 <= ... <= lambda_n`.
    pub eigenvalues: Vector,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomp {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reconstructs `U diag(lambda) U'`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.eigenvectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[i];
        }
        scaled * self.eigenvectors.transpose()
    }

    /// `lambda_{d+1}` in 1-based spectral indexing, i.e. the (d+1)-th smallest.
    pub fn lambda_after(&self, d: usize) -> f64 {
        self.eigenvalues[d]
    }

    /// Spectral square root with negative eigenvalues clamped to zero.
    /// Eigenvalues below `-sqrt_clamp * lambda_max` are rejected.
    pub fn sqrt_psd(&self, tol: &Tolerances) -> Result<Matrix> {
        let lmax = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        let mut scaled = self.eigenvectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            let l = self.eigenvalues[i];
            if l < -tol.sqrt_clamp * f64::max(1.0, lmax) {
                return Err(Error::NotPsd {
                    min_eig: l,
                    tol: tol.sqrt_clamp * f64::max(1.0, lmax),
                });
            }
            col *= l.max(0.0).sqrt();
        }
        Ok(&scaled * self.eigenvectors.transpose())
    }

    /// Number of eigenvalues at most `theta * lambda_n`; a starting point for
    /// choosing the small-outlier count `d` when it is not known a priori.
    pub fn suggest_d(&self, theta: f64) -> usize {
        let lmax = self.eigenvalues[self.n() - 1];
        self.eigenvalues.iter().filter(|&&l| l <= theta * lmax).count()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi, sorted
/// ascending. Jacobi is slower than tridiagonal QR but stays well-defined on
/// the rank-deficient, repeated-eigenvalue matrices this toolkit is full of
/// (projections, Gram matrices of a few rows).
pub fn eig(a: &SymMatrix) -> Result<EigenDecomp> {
    let n = a.n();
    if n == 0 {
        return Err(Error::arg("cannot decompose an empty matrix"));
    }
    let mut m = a.mat.clone();
    let mut v = Matrix::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;
    let max_sweeps = 64;
    let mut converged = false;

    for _sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // skip rotations that cannot change anything at this scale
                if apq.abs() <= 1e-18 * scale {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip - s * miq;
                    m[(i, q)] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[(p, i)];
                    let mqi = m[(q, i)];
                    m[(p, i)] = c * mpi - s * mqi;
                    m[(q, i)] = s * mpi + c * mqi;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if (2.0 * off).sqrt() > 1e-10 * scale {
            return Err(Error::EigFailed { iterations: max_sweeps });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let eigenvalues = Vector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &v.column(src));
    }
    Ok(EigenDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// `u' Sigma v`.
pub fn sigma_inner(sigma: &SymMatrix, u: &Vector, v: &Vector) -> Result<f64> {
    sigma.inner(u, v)
}

/// `sqrt(u' Sigma u)` with the clamping rule of `SymMatrix::norm`.
pub fn sigma_norm(sigma: &SymMatrix, u: &Vector) -> Result<f64> {
    sigma.norm(u)
}

/// Projection onto the top `n - d` eigenspaces: `P = sum_{i=d+1}^n u_i u_i'`.
/// `d = 0` gives the identity and `d = n` the zero matrix.
pub fn projection_top(e: &EigenDecomp, d: usize) -> Result<SymMatrix> {
    let n = e.n();
    if d > n {
        return Err(Error::arg(format!("d = {d} out of range for n = {n}")));
    }
    if d == 0 {
        return Ok(SymMatrix::from_symmetric_unchecked(Matrix::identity(n, n)));
    }
    if d == n {
        return Ok(SymMatrix::from_symmetric_unchecked(Matrix::zeros(n, n)));
    }
    let top = e.eigenvectors.columns(d, n - d);
    let p = top * top.transpose();
    Ok(SymMatrix::from_symmetric_unchecked((&p + p.transpose()) * 0.5))
}

/// Result of generalized Gram-Schmidt: coefficient vectors over the input
/// list, the corresponding images, and which images vanished.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    /// `coeffs[i]` lives in R^k (k = number of input vectors); the image of
    /// `coeffs[i]` is `sum_l coeffs[i][l] * input[l]`.
    pub coeffs: Vec<Vector>,
    /// Images under the input list, unit inner-norm unless flagged zero.
    pub images: Vec<Vector>,
    /// `zero[i]` marks images with norm below the skip threshold.
    pub zero: Vec<bool>,
}

impl GramSchmidt {
    /// Number of non-vanishing images, i.e. the dimension of the span.
    pub fn rank(&self) -> usize {
        self.zero.iter().filter(|z| !**z).count()
    }
}

/// Modified Gram-Schmidt under an arbitrary symmetric PSD bilinear form, with
/// one re-orthogonalization pass. Images whose inner-norm falls below
/// `gs_skip * max_initial_norm` are flagged zero and skipped by later steps;
/// the remaining images are normalized to unit inner-norm.
pub fn gram_schmidt_general<F>(vectors: &[Vector], inner: F, tol: &Tolerances) -> Result<GramSchmidt>
where
    F: Fn(&Vector, &Vector) -> f64,
{
    if vectors.is_empty() {
        return Err(Error::arg("gram_schmidt_general needs at least one vector"));
    }
    let k = vectors.len();
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::dim("gram_schmidt_general: inconsistent vector lengths"));
    }

    let self_inner = |v: &Vector| -> Result<f64> {
        let q = inner(v, v);
        if q < -tol.norm_clamp * f64::max(1.0, q.abs()) {
            return Err(Error::NotPsd {
                min_eig: q,
                tol: tol.norm_clamp,
            });
        }
        Ok(q.max(0.0))
    };

    let max_initial = vectors
        .iter()
        .map(|v| self_inner(v).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let skip = tol.gs_skip * f64::max(max_initial, f64::MIN_POSITIVE);

    let mut coeffs: Vec<Vector> = Vec::with_capacity(k);
    let mut images: Vec<Vector> = Vec::with_capacity(k);
    let mut zero: Vec<bool> = Vec::with_capacity(k);

    for i in 0..k {
        let mut c = Vector::zeros(k);
        c[i] = 1.0;
        let mut g = vectors[i].clone();
        // Two passes of projection removal for stability.
        for _pass in 0..2 {
            for j in 0..i {
                if zero[j] {
                    continue;
                }
                let proj = inner(&g, &images[j]);
                g -= &images[j] * proj;
                c -= &coeffs[j] * proj;
            }
        }
        let norm = self_inner(&g)?.sqrt();
        if norm <= skip {
            // Vanishing image: keep the (raw) coefficient vector so the set
            // still spans R^k, but flag it and leave it out of later steps.
            coeffs.push(c);
            images.push(g);
            zero.push(true);
        } else {
            coeffs.push(c / norm);
            images.push(g / norm);
            zero.push(false);
        }
    }

    Ok(GramSchmidt {
        coeffs,
        images,
        zero,
    })
}

/// Design matrix plus responses for the regression model.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub x: Matrix,
    pub y: Vector,
    /// Seed the set was drawn from, when generated rather than loaded.
    pub seed: Option<u64>,
}

impl SampleSet {
    pub fn new(x: Matrix, y: Vector, seed: Option<u64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dim(format!(
                "design matrix has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("sample set contains NaN or infinite entries"));
        }
        Ok(SampleSet { x, y, seed })
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `lo..hi` as a new sample set.
    pub fn slice_rows(&self, lo: usize, hi: usize) -> SampleSet {
        SampleSet {
            x: self.x.rows(lo, hi - lo).into_owned(),
            y: self.y.rows(lo, hi - lo).into_owned(),
            seed: self.seed,
        }
    }

    /// Mean squared residual `(1/m) ||Xw - y||^2`.
    pub fn empirical_risk(&self, w: &Vector) -> f64 {
        let r = &self.x * w - &self.y;
        r.norm_squared() / self.m() as f64
    }
}

/// Sampler with a cached spectral square root; use this when drawing many
/// sample sets from the same covariance (eigendecompositions are the cost).
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    root: Matrix,
}

impl GaussianSampler {
    pub fn new(sigma: &SymMatrix) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let e = sigma.assert_psd(&tol)?;
        Ok(GaussianSampler {
            root: e.sqrt_psd(&tol)?,
        })
    }

    /// Draws `m` rows `X_i = Sigma^{1/2} z_i`, `z_i` standard normal, and
    /// responses `y_i = <X_i, v*> + N(0, noise_var)`. Fully reproducible from
    /// the seed: all covariate rows are drawn first (row-major), then the
    /// noise vector.
    pub fn sample(&self, m: usize, noise_var: f64, v_star: &Vector, seed: u64) -> Result<SampleSet> {
        let n = self.root.nrows();
        if v_star.len() != n {
            return Err(Error::dim(format!(
                "v* has length {} but Sigma is {n}x{n}",
                v_star.len()
            )));
        }
        if noise_var < 0.0 {
            return Err(Error::arg("noise variance must be nonnegative"));
        }
        let mut rng = rng_for(seed, 0);
        let mut x = Matrix::zeros(m, n);
        let mut z = Vector::zeros(n);
        for i in 0..m {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            let row = &self.root * &z;
            x.row_mut(i).copy_from(&row.transpose());
        }
        let sd = noise_var.sqrt();
        let mut y = &x * v_star;
        if sd > 0.0 {
            for yi in y.iter_mut() {
                let g: f64 = rng.sample(StandardNormal);
                *yi += sd * g;
            }
        }
        SampleSet::new(x, y, Some(seed))
    }
}

/// One-shot convenience around [`GaussianSampler`].
pub fn sample_gaussian(
    sigma: &SymMatrix,
    m: usize,
    noise_var: f64,
    v_star: &Vector,
    seed: u64,
) -> Result<SampleSet> {
    GaussianSampler::new(sigma)?.sample(m, noise_var, v_star, seed)
}
