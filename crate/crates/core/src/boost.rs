//! Residual boosting with covariance augmentation, and the brute-force
//! augmented-dictionary variant with holdout model selection.
//!
//! Each boosting round appends the current estimate's prediction as an extra
//! covariate, re-peels the augmented covariance, and fits the adaptively
//! regularized Lasso on the round's sample block against the residual
//! response. Folding the augmented weight back multiplies the old estimate.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig, gram_schmidt_general, EigenDecomp, SampleSet, SymMatrix};
use crate::peel::peel_from_eigen;
use crate::solvers::{
    adaptively_regularized_lasso, finite_model_selection, regularized_squared_lasso, FitReport,
    SolverConfig,
};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// State after a boosting round.
#[derive(Debug, Clone)]
pub struct BoostRound {
    pub round: usize,
    pub report: FitReport,
    /// Cumulative estimate after folding this round in.
    pub s_hat: Vector,
    /// `||s_hat - v*||_Sigma^2` when the truth is known.
    pub excess_risk: Option<f64>,
}

/// `(n+1) x (n+1)` block matrix `[[Sigma, Sigma s], [s' Sigma, s' Sigma s]]`.
/// A Gram extension, hence PSD whenever `Sigma` is.
pub fn augment_covariance(sigma: &SymMatrix, s: &Vector) -> Result<SymMatrix> {
    let n = sigma.n();
    if s.len() != n {
        return Err(Error::dim(format!("s has length {}, Sigma is {n}x{n}", s.len())));
    }
    let sig_s = sigma.mul_vec(s);
    let corner = s.dot(&sig_s);
    let mut m = Matrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(sigma.as_matrix());
    for i in 0..n {
        m[(i, n)] = sig_s[i];
        m[(n, i)] = sig_s[i];
    }
    m[(n, n)] = corner;
    Ok(SymMatrix::from_symmetric_unchecked(m))
}

/// Clipped covariance `lambda_{d+1}^{-1} sum_i min(lambda_i, lambda_{d+1}) u_i u_i'`.
/// Satisfies `0 <= clipped <= I` and `clipped <= Sigma / lambda_{d+1}`.
pub fn clipped_covariance(e: &EigenDecomp, d: usize) -> Result<SymMatrix> {
    let n = e.n();
    if d >= n {
        return Err(Error::arg(format!("d = {d} out of range for n = {n}")));
    }
    let lam = e.eigenvalues[d];
    if lam <= 0.0 {
        return Err(Error::arg(format!(
            "lambda_{{d+1}} = {lam:e} must be positive for the clipped covariance"
        )));
    }
    let mut scaled = e.eigenvectors.clone();
    for (i, mut col) in scaled.column_iter_mut().enumerate() {
        col *= (e.eigenvalues[i].min(lam) / lam).max(0.0);
    }
    let m = &scaled * e.eigenvectors.transpose();
    Ok(SymMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5))
}

fn augment_samples(block: &SampleSet, s_hat: &Vector) -> Result<SampleSet> {
    let (m, n) = (block.m(), block.n());
    let xs = &block.x * s_hat;
    let mut x_aug = Matrix::zeros(m, n + 1);
    x_aug.view_mut((0, 0), (m, n)).copy_from(&block.x);
    x_aug.set_column(n, &xs);
    let y_res = &block.y - &xs;
    SampleSet::new(x_aug, y_res, block.seed)
}

/// One adaptively regularized Lasso fit driven by its own eigendecomposition
/// and peeling: `lambda_high = lambda_{n - d_h}` and the exempt set comes from
/// `iterative_peeling(sigma, d_l, t)`.
pub fn arlasso_auto(
    sigma: &SymMatrix,
    samples: &SampleSet,
    t: usize,
    d_l: usize,
    d_h: usize,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    let n = sigma.n();
    if samples.n() != n {
        return Err(Error::dim(format!(
            "samples have n = {}, Sigma is {n}x{n}",
            samples.n()
        )));
    }
    if d_h >= n {
        return Err(Error::arg(format!("d_h = {d_h} out of range")));
    }
    let e = eig(sigma)?;
    let peel = peel_from_eigen(&e, d_l, t)?;
    let lambda_high = e.eigenvalues[n - 1 - d_h].max(0.0);
    adaptively_regularized_lasso(lambda_high, &samples.x, &samples.y, &peel.s, delta, cfg)
}

/// The boosting loop. Partitions the samples into `l_rounds` equal blocks
/// (truncating to `l_rounds * floor(m / l_rounds)` rows), and per round fits
/// the augmented, re-peeled problem with sparsity `t+1`, small-outlier count
/// `d_l + 1`, large-outlier count `d_h + 1`, and failure budget `delta / L`.
/// A round that fails to converge is retried once with 4x iterations; if the
/// retry also fails the loop aborts and returns the best estimate so far with
/// `converged = false`.
#[allow(clippy::too_many_arguments)]
pub fn boar_fit(
    sigma: &SymMatrix,
    samples: &SampleSet,
    t: usize,
    d_l: usize,
    l_rounds: usize,
    delta: f64,
    d_h: usize,
    cfg: &SolverConfig,
    v_star: Option<&Vector>,
) -> Result<(FitReport, Vec<BoostRound>)> {
    let n = sigma.n();
    if l_rounds == 0 {
        return Err(Error::arg("boosting needs at least one round"));
    }
    if samples.m() < l_rounds {
        return Err(Error::arg(format!(
            "m = {} samples cannot fill {l_rounds} rounds",
            samples.m()
        )));
    }
    if samples.n() != n {
        return Err(Error::dim(format!(
            "samples have n = {}, Sigma is {n}x{n}",
            samples.n()
        )));
    }
    let block_len = samples.m() / l_rounds;
    if block_len * l_rounds != samples.m() {
        eprintln!(
            "warning: truncating {} samples to {} ({} rounds of {})",
            samples.m(),
            block_len * l_rounds,
            l_rounds,
            block_len
        );
    }

    let mut s_hat = Vector::zeros(n);
    let mut rounds: Vec<BoostRound> = Vec::with_capacity(l_rounds);
    let mut aborted = false;

    for j in 0..l_rounds {
        let block = samples.slice_rows(j * block_len, (j + 1) * block_len);
        let sigma_aug = augment_covariance(sigma, &s_hat)?;
        let aug = augment_samples(&block, &s_hat)?;

        let mut rep = arlasso_auto(&sigma_aug, &aug, t + 1, d_l + 1, d_h + 1, delta / l_rounds as f64, cfg)?;
        if !rep.converged {
            let retry_cfg = cfg.with_max_iter(cfg.max_iter.saturating_mul(4));
            rep = arlasso_auto(
                &sigma_aug,
                &aug,
                t + 1,
                d_l + 1,
                d_h + 1,
                delta / l_rounds as f64,
                &retry_cfg,
            )?;
        }
        let converged = rep.converged;

        if converged {
            let w = &rep.v_hat;
            let v_round = w.rows(0, n).into_owned() + &s_hat * w[n];
            s_hat += v_round;
        }

        let excess = match v_star {
            Some(vs) => {
                let diff = &s_hat - vs;
                Some(sigma.quad_form(&diff)?)
            }
            None => None,
        };
        rounds.push(BoostRound {
            round: j,
            report: rep,
            s_hat: s_hat.clone(),
            excess_risk: excess,
        });

        if !converged {
            aborted = true;
            break;
        }
    }

    let objective = rounds.last().map(|r| r.report.objective).unwrap_or(f64::NAN);
    let iterations = rounds.iter().map(|r| r.report.iterations).sum();
    let mut rep = FitReport::new(s_hat, objective, iterations, !aborted);
    if let Some(vs) = v_star {
        rep = rep.with_excess_risk(sigma, vs)?;
    }
    Ok((rep, rounds))
}

/// Result of the augmented-dictionary fit: the selected subset and all
/// candidate diagnostics.
#[derive(Debug, Clone)]
pub struct AugDictOutcome {
    pub report: FitReport,
    pub chosen_subset: Vec<usize>,
    pub candidates: usize,
    pub peeled: BTreeSet<usize>,
}

fn count_combinations(n: usize, k: usize) -> u128 {
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

/// Brute-force feature adaptation: peel `S`, build the clipped covariance,
/// and for every `t`-subset `T` of `S` fit the l1-squared-regularized program
/// over `[I_n | d_1 .. d_t]` (a clipped-covariance-orthonormal basis of the
/// subset span) on the first half of the samples; the winner on the second
/// half is returned. Candidate fits run in parallel; the selection is by
/// holdout loss with ties to the earliest subset in lexicographic order.
#[allow(clippy::too_many_arguments)]
pub fn augmented_dictionary_lasso(
    sigma: &SymMatrix,
    samples: &SampleSet,
    t: usize,
    d_l: usize,
    delta: f64,
    d_h: usize,
    subset_cap: u64,
    cfg: &SolverConfig,
) -> Result<AugDictOutcome> {
    let n = sigma.n();
    if samples.n() != n {
        return Err(Error::dim(format!(
            "samples have n = {}, Sigma is {n}x{n}",
            samples.n()
        )));
    }
    if samples.m() < 2 {
        return Err(Error::arg("need at least two samples to split"));
    }
    let e = eig(sigma)?;
    let peel = peel_from_eigen(&e, d_l, t)?;
    let lambda_high = e.eigenvalues[n - 1 - d_h].max(0.0);
    let clipped = clipped_covariance(&e, d_l)?;

    let s_sorted: Vec<usize> = peel.s.iter().copied().collect();
    let subset_size = t.min(s_sorted.len());
    let n_candidates = count_combinations(s_sorted.len(), subset_size).max(1);
    if n_candidates > subset_cap as u128 {
        return Err(Error::BudgetExceeded {
            base: s_sorted.len(),
            candidates: n_candidates,
            cap: subset_cap,
        });
    }

    let half = samples.m() / 2;
    let first = samples.slice_rows(0, half);
    let second = samples.slice_rows(half, samples.m());

    let log_term = (8.0 * n as f64 / delta).ln();
    let a = 8.0 * lambda_high * log_term;
    let b = 2.0 * (2.0 * lambda_high * log_term).sqrt() * first.y.norm();

    let subsets: Vec<Vec<usize>> = if subset_size == 0 {
        vec![Vec::new()]
    } else {
        s_sorted.iter().copied().combinations(subset_size).collect()
    };

    let tol = Tolerances::DEFAULT;
    let fits: Vec<Result<(Vector, FitReport)>> = subsets
        .par_iter()
        .map(|subset| {
            // Columns of D(T): identity then the clipped-orthonormal basis of
            // span{e_i : i in T}.
            let extra: Vec<Vector> = if subset.is_empty() {
                Vec::new()
            } else {
                let basis: Vec<Vector> = subset
                    .iter()
                    .map(|&i| {
                        let mut v = Vector::zeros(n);
                        v[i] = 1.0;
                        v
                    })
                    .collect();
                let gs = gram_schmidt_general(
                    &basis,
                    |p, q| clipped.inner(p, q).unwrap(),
                    &tol,
                )?;
                gs.images
                    .into_iter()
                    .zip(gs.zero.iter())
                    .filter(|(_, z)| !**z)
                    .map(|(img, _)| img)
                    .collect()
            };
            let cols = n + extra.len();
            let mut feat = Matrix::zeros(first.m(), cols);
            feat.view_mut((0, 0), (first.m(), n)).copy_from(&first.x);
            for (c, d_col) in extra.iter().enumerate() {
                feat.set_column(n + c, &(&first.x * d_col));
            }
            let rep = regularized_squared_lasso(&feat, &first.y, &BTreeSet::new(), a, b, cfg)?;
            // Fold back to an n-dim candidate.
            let mut v = rep.v_hat.rows(0, n).into_owned();
            for (c, d_col) in extra.iter().enumerate() {
                v += d_col * rep.v_hat[n + c];
            }
            Ok((v, rep))
        })
        .collect();

    let mut candidates = Vec::with_capacity(fits.len());
    let mut reports = Vec::with_capacity(fits.len());
    for f in fits {
        let (v, rep) = f?;
        candidates.push(v);
        reports.push(rep);
    }

    let winner = finite_model_selection(&candidates, &second)?;
    let mut report = reports[winner].clone();
    report.v_hat = candidates[winner].clone();
    report.note = Some(format!(
        "augdict subsets={} winner={:?}",
        subsets.len(),
        subsets[winner]
    ));
    Ok(AugDictOutcome {
        report,
        chosen_subset: subsets[winner].clone(),
        candidates: subsets.len(),
        peeled: peel.s,
    })
}
