//! Dictionaries of feature atoms: construction from the peeled coordinate
//! set, brute-force and greedy-packing builders, weighted-l1 representation
//! cost, and sampled verification of the correlation property.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt_general, SymMatrix};
use crate::peel::peel_from_eigen;
use crate::rng::rng_for;
use crate::solvers::{weighted_basis_pursuit, SolverConfig};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    StandardBasis,
    SmallEig,
    BruteForce,
    Packing,
    ArbitraryRep,
    Expander,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Provenance::StandardBasis => "standard-basis",
            Provenance::SmallEig => "small-eig",
            Provenance::BruteForce => "brute-force",
            Provenance::Packing => "packing",
            Provenance::ArbitraryRep => "arbitrary-rep",
            Provenance::Expander => "expander",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "standard-basis" => Provenance::StandardBasis,
            "small-eig" => Provenance::SmallEig,
            "brute-force" => Provenance::BruteForce,
            "packing" => Provenance::Packing,
            "arbitrary-rep" => Provenance::ArbitraryRep,
            "expander" => Provenance::Expander,
            other => return Err(Error::Format(format!("unknown provenance {other:?}"))),
        })
    }
}

/// An ordered list of atoms with cached Sigma-norms. Zero-norm atoms are
/// permitted only when `zero_flags` marks them (singular covariance).
#[derive(Debug, Clone)]
pub struct Dictionary {
    atoms: Vec<Vector>,
    sigma_norms: Vec<f64>,
    zero_flags: Vec<bool>,
    provenance: Provenance,
}

impl Dictionary {
    pub fn new(atoms: Vec<Vector>, sigma: &SymMatrix, provenance: Provenance) -> Result<Self> {
        let sigma_norms = atoms
            .iter()
            .map(|a| sigma.norm(a))
            .collect::<Result<Vec<_>>>()?;
        Self::with_norms(atoms, sigma_norms, provenance)
    }

    /// Builds from precomputed norms (used when the covariance is implicit,
    /// e.g. an empirical Gram that is never materialized).
    pub fn with_norms(atoms: Vec<Vector>, sigma_norms: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if atoms.len() != sigma_norms.len() {
            return Err(Error::dim("atom and norm counts differ"));
        }
        let max_norm = sigma_norms.iter().cloned().fold(0.0f64, f64::max);
        let zero_flags = sigma_norms
            .iter()
            .map(|&s| s <= 1e-12 * f64::max(1.0, max_norm))
            .collect();
        Ok(Dictionary {
            atoms,
            sigma_norms,
            zero_flags,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vector] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Vector {
        &self.atoms[i]
    }

    pub fn sigma_norms(&self) -> &[f64] {
        &self.sigma_norms
    }

    pub fn zero_flags(&self) -> &[bool] {
        &self.zero_flags
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Atoms as the columns of an `n x N` matrix.
    pub fn as_matrix(&self) -> Matrix {
        let n = self.atoms.first().map(|a| a.len()).unwrap_or(0);
        let mut m = Matrix::zeros(n, self.atoms.len());
        for (j, a) in self.atoms.iter().enumerate() {
            m.set_column(j, a);
        }
        m
    }

    /// Checks the cached norms against `sigma`.
    pub fn validate(&self, sigma: &SymMatrix) -> Result<()> {
        for (i, atom) in self.atoms.iter().enumerate() {
            let fresh = sigma.norm(atom)?;
            if (fresh - self.sigma_norms[i]).abs() > 1e-10 * f64::max(1.0, fresh) {
                return Err(Error::arg(format!(
                    "cached Sigma-norm of atom {i} is stale: {} vs {fresh}",
                    self.sigma_norms[i]
                )));
            }
        }
        Ok(())
    }
}

/// Deterministic pool of random t-sparse vectors: support uniform over
/// C(n, t), standard normal coefficients. The falsification distribution for
/// "every t-sparse v" quantifiers.
pub fn sample_sparse_pool(n: usize, t: usize, count: usize, seed: u64) -> Vec<Vector> {
    let mut out = Vec::with_capacity(count);
    for trial in 0..count {
        let mut rng = rng_for(seed, trial as u64);
        let mut v = Vector::zeros(n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..t.min(n) {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
            v[idx[i]] = rng.sample::<f64, _>(StandardNormal);
        }
        out.push(v);
    }
    out
}

pub(crate) fn count_combinations(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn basis_vec(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Standard basis as a dictionary.
pub fn standard_basis_dictionary(sigma: &SymMatrix) -> Result<Dictionary> {
    let n = sigma.n();
    let atoms = (0..n).map(|i| basis_vec(n, i)).collect();
    Dictionary::new(atoms, sigma, Provenance::StandardBasis)
}

/// Dictionary for covariances with few small eigenvalues: the standard basis
/// plus a Sigma-orthogonal (unit Sigma-norm) basis of `span{e_i : i in T}`
/// for every `t`-subset `T` of the peeled set `S`. Size is at most
/// `n + t * C(|S|, t)`.
pub fn build_small_eig_l1rep(
    sigma: &SymMatrix,
    d: usize,
    t: usize,
    subset_cap: u64,
) -> Result<Dictionary> {
    let n = sigma.n();
    let e = crate::linalg::eig(sigma)?;
    let peel = peel_from_eigen(&e, d, t)?;
    if peel.lambda_after_d <= 0.0 {
        return Err(Error::arg(format!(
            "lambda_{{d+1}} = {:e} must be positive",
            peel.lambda_after_d
        )));
    }
    let s_sorted: Vec<usize> = peel.s.iter().copied().collect();
    let size = t.min(s_sorted.len());
    let combos = count_combinations(s_sorted.len(), size);
    if combos > subset_cap as u128 {
        return Err(Error::BudgetExceeded {
            base: s_sorted.len(),
            candidates: combos,
            cap: subset_cap,
        });
    }

    let tol = Tolerances::DEFAULT;
    let mut atoms: Vec<Vector> = (0..n).map(|i| basis_vec(n, i)).collect();
    if size > 0 {
        for subset in s_sorted.iter().copied().combinations(size) {
            let basis: Vec<Vector> = subset.iter().map(|&i| basis_vec(n, i)).collect();
            let gs = gram_schmidt_general(&basis, |p, q| sigma.inner(p, q).unwrap(), &tol)?;
            for (img, &z) in gs.images.iter().zip(gs.zero.iter()) {
                if !z {
                    atoms.push(img.clone());
                }
            }
        }
    }
    Dictionary::new(atoms, sigma, Provenance::SmallEig)
}

/// Reference dictionary: a Sigma-orthonormal basis for every `t`-subset of
/// all `n` covariates. Emits exactly `t` atoms per subset (vanishing basis
/// images are kept as flagged zero atoms so the count is `t * C(n, t)`).
pub fn brute_force_dictionary(sigma: &SymMatrix, t: usize, subset_cap: u64) -> Result<Dictionary> {
    let n = sigma.n();
    if t == 0 || t > n {
        return Err(Error::arg(format!("t = {t} out of range for n = {n}")));
    }
    let combos = count_combinations(n, t);
    if combos > subset_cap as u128 {
        return Err(Error::BudgetExceeded {
            base: n,
            candidates: combos,
            cap: subset_cap,
        });
    }
    let tol = Tolerances::DEFAULT;
    let mut atoms = Vec::with_capacity((combos as usize) * t);
    for subset in (0..n).combinations(t) {
        let basis: Vec<Vector> = subset.iter().map(|&i| basis_vec(n, i)).collect();
        let gs = gram_schmidt_general(&basis, |p, q| sigma.inner(p, q).unwrap(), &tol)?;
        for img in gs.images {
            atoms.push(img);
        }
    }
    Dictionary::new(atoms, sigma, Provenance::BruteForce)
}

/// Greedy maximal packing: scans the pool in order and keeps `v` when its
/// normalized Sigma-correlation with every kept atom is strictly below
/// `alpha`. The output is pairwise alpha-incoherent and maximal w.r.t. the
/// pool, hence a dictionary for the pool's directions.
pub fn greedy_packing(
    sigma: &SymMatrix,
    alpha: f64,
    pool: &[Vector],
) -> Result<Dictionary> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::arg("alpha must be positive"));
    }
    let mut kept: Vec<Vector> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    for v in pool {
        let nv = sigma.norm(v)?;
        if nv <= 0.0 {
            continue;
        }
        let mut ok = true;
        for (u, nu) in kept.iter().zip(norms.iter()) {
            let c = sigma.inner(v, u)?.abs();
            if c >= alpha * nv * nu {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(v.clone());
            norms.push(nv);
        }
    }
    Dictionary::with_norms(kept, norms, Provenance::Packing)
}

/// Weighted-l1 representation cost
/// `min sum_i |alpha_i| w_i  s.t.  sum_i alpha_i D_i = v` with weights
/// defaulting to the cached Sigma-norms. Zero-weight atoms carry free
/// coefficients. Errors when `v` is outside the span (within `feas_tol`) or
/// every weight vanishes.
pub fn representation_cost(
    dict: &Dictionary,
    v: &Vector,
    weights: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(f64, Vector)> {
    if dict.is_empty() {
        return Err(Error::arg("representation_cost needs a nonempty dictionary"));
    }
    let w = weights.unwrap_or_else(|| dict.sigma_norms());
    if w.len() != dict.len() {
        return Err(Error::dim("weight count differs from atom count"));
    }
    if w.iter().all(|&x| x <= 0.0) {
        return Err(Error::arg("all representation weights are zero"));
    }
    let d = dict.as_matrix();
    let rep = weighted_basis_pursuit(&d, v, w, cfg).map_err(|e| match e {
        Error::Infeasible { residual, .. } => Error::NotRepresentable(residual),
        other => other,
    })?;
    Ok((rep.objective, rep.v_hat))
}

/// Sampled falsifier report for the `(t, alpha)`-dictionary property.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub min_correlation: f64,
    pub worst_v: Vector,
    pub pass: bool,
    pub trials: usize,
}

fn max_correlation(dict: &Dictionary, sigma: &SymMatrix, v: &Vector, nv: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for (atom, (&na, &z)) in dict
        .atoms()
        .iter()
        .zip(dict.sigma_norms().iter().zip(dict.zero_flags().iter()))
    {
        if z || na <= 0.0 {
            continue;
        }
        let c = sigma.inner(v, atom)?.abs() / (nv * na);
        best = best.max(c);
    }
    Ok(best)
}

/// Samples `trials` random `t`-sparse unit-Sigma-norm vectors (uniform
/// support, Gaussian coefficients) and, when `n <= 12` and `t <= 3`, sweeps
/// every +/-1 pattern on every support of size up to `t`. Reports the minimum
/// over tested `v` of the maximum normalized correlation with the dictionary;
/// PASS means that minimum is at least `alpha`. A sampled falsifier, not a
/// proof.
pub fn verify_dictionary(
    dict: &Dictionary,
    sigma: &SymMatrix,
    t: usize,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if dict.is_empty() {
        return Err(Error::arg("verify_dictionary needs a nonempty dictionary"));
    }
    if trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    let n = sigma.n();

    let mut tested: Vec<Vector> = Vec::new();
    if n <= 12 && t <= 3 {
        for size in 1..=t.min(n) {
            for subset in (0..n).combinations(size) {
                // all sign patterns up to global sign
                let patterns = 1usize << (size - 1);
                for bits in 0..patterns {
                    let mut v = Vector::zeros(n);
                    for (b, &i) in subset.iter().enumerate() {
                        let sign = if b > 0 && (bits >> (b - 1)) & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        v[i] = sign;
                    }
                    tested.push(v);
                }
            }
        }
    }

    let results: Vec<Result<Option<(f64, Vector)>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(seed, trial as u64 + 1);
            let mut v = Vector::zeros(n);
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..t.min(n) {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
                v[idx[i]] = rng.sample::<f64, _>(StandardNormal);
            }
            let nv = sigma.norm(&v)?;
            if nv <= 1e-10 {
                return Ok(None);
            }
            let c = max_correlation(dict, sigma, &v, nv)?;
            Ok(Some((c, v)))
        })
        .collect();

    let mut min_corr = f64::INFINITY;
    let mut worst = Vector::zeros(n);
    let mut ran = 0usize;
    for r in results {
        if let Some((c, v)) = r? {
            ran += 1;
            if c < min_corr {
                min_corr = c;
                worst = v;
            }
        }
    }
    for v in &tested {
        let nv = sigma.norm(v)?;
        if nv <= 1e-10 {
            continue;
        }
        ran += 1;
        let c = max_correlation(dict, sigma, v, nv)?;
        if c < min_corr {
            min_corr = c;
            worst = v.clone();
        }
    }
    if ran == 0 {
        return Err(Error::arg("no testable vectors (Sigma annihilated every sample)"));
    }
    Ok(VerifyReport {
        min_correlation: min_corr,
        worst_v: worst,
        pass: min_corr >= alpha,
        trials: ran,
    })
}

/// Constructive side of the covering/packing relationship: a maximal greedy
/// packing from the pool must be a dictionary for the pool. Reports sizes and
/// the minimum correlation of pool elements against the packing.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub pool_size: usize,
    pub packing_size: usize,
    pub min_correlation: f64,
    pub pass: bool,
}

pub fn covering_packing_sandwich_check(
    sigma: &SymMatrix,
    alpha: f64,
    pool: &[Vector],
) -> Result<SandwichReport> {
    let packing = greedy_packing(sigma, alpha, pool)?;
    let mut min_corr = f64::INFINITY;
    for v in pool {
        let nv = sigma.norm(v)?;
        if nv <= 1e-10 {
            continue;
        }
        let c = max_correlation(&packing, sigma, v, nv)?;
        min_corr = min_corr.min(c);
    }
    if !min_corr.is_finite() {
        min_corr = 1.0;
    }
    Ok(SandwichReport {
        pool_size: pool.len(),
        packing_size: packing.len(),
        min_correlation: min_corr,
        pass: min_corr >= alpha - 1e-9,
    })
}
