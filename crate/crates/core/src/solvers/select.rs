//! Finite selection: the single-atom weak learner and holdout model selection.

use crate::error::{Error, Result};
use crate::linalg::SampleSet;
use crate::solvers::FitReport;
use crate::Vector;

/// For each atom `v`, the best scalar fit is `beta(v) = <Xv, y> / ||Xv||^2`
/// (zero when `Xv = 0`). Returns the atom minimizing `||beta Xv - y||^2`,
/// ties broken by lowest index.
pub fn weak_learner_select(atoms: &[Vector], samples: &SampleSet) -> Result<(usize, f64, FitReport)> {
    if atoms.is_empty() {
        return Err(Error::arg("weak_learner_select needs a nonempty dictionary"));
    }
    let mut best: Option<(usize, f64, f64)> = None; // (index, beta, residual)
    for (i, atom) in atoms.iter().enumerate() {
        if atom.len() != samples.n() {
            return Err(Error::dim(format!(
                "atom {i} has length {}, samples have n = {}",
                atom.len(),
                samples.n()
            )));
        }
        let xv = &samples.x * atom;
        let denom = xv.norm_squared();
        let beta = if denom > 0.0 { xv.dot(&samples.y) / denom } else { 0.0 };
        let resid = (xv * beta - &samples.y).norm_squared();
        match best {
            Some((_, _, r)) if resid >= r => {}
            _ => best = Some((i, beta, resid)),
        }
    }
    let (idx, beta, resid) = best.unwrap();
    let rep = FitReport::new(atoms[idx].clone() * beta, resid, 1, true);
    Ok((idx, beta, rep))
}

/// Index of the candidate minimizing holdout squared loss `||Xw - y||^2`;
/// ties go to the lowest index.
pub fn finite_model_selection(candidates: &[Vector], holdout: &SampleSet) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::arg("finite_model_selection needs a nonempty candidate set"));
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, w) in candidates.iter().enumerate() {
        if w.len() != holdout.n() {
            return Err(Error::dim(format!(
                "candidate {i} has length {}, holdout has n = {}",
                w.len(),
                holdout.n()
            )));
        }
        let loss = (&holdout.x * w - &holdout.y).norm_squared();
        if loss < best.1 {
            best = (i, loss);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_gaussian;
    use crate::linalg::SymMatrix;
    use crate::testutil::approx_eq;
    use crate::Matrix;

    fn basis(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn weak_learner_exact_fit() {
        let samples = SampleSet::new(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![0.0, 3.0]),
            None,
        )
        .unwrap();
        let (idx, beta, rep) = weak_learner_select(&[basis(2, 0), basis(2, 1)], &samples).unwrap();
        assert_eq!(idx, 1);
        assert!(approx_eq(beta, 3.0, 1e-12));
        assert!(rep.objective <= 1e-12);
    }

    #[test]
    fn weak_learner_two_candidate_enumeration() {
        let samples = SampleSet::new(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![2.0, 1.0]),
            None,
        )
        .unwrap();
        let atoms = vec![
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![1.0, 1.0]),
        ];
        let (idx, beta, rep) = weak_learner_select(&atoms, &samples).unwrap();
        assert_eq!(idx, 1);
        assert!(approx_eq(beta, 1.5, 1e-12));
        assert!(approx_eq(rep.objective, 0.5, 1e-12));
    }

    #[test]
    fn model_selection_prefers_truth_and_breaks_ties_low() {
        let sigma = SymMatrix::identity(4);
        let v_star = Vector::from_vec(vec![1.0, 0.0, -1.0, 0.0]);
        let holdout = sample_gaussian(&sigma, 100, 0.0, &v_star, 21).unwrap();
        let alt = &v_star + basis(4, 1);
        let idx = finite_model_selection(&[v_star.clone(), alt], &holdout).unwrap();
        assert_eq!(idx, 0);
        // duplicates: lowest index wins
        let idx = finite_model_selection(&[v_star.clone(), v_star.clone()], &holdout).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn empty_inputs_error() {
        let holdout = SampleSet::new(Matrix::identity(2, 2), Vector::zeros(2), None).unwrap();
        assert!(finite_model_selection(&[], &holdout).is_err());
        assert!(weak_learner_select(&[], &holdout).is_err());
    }
}
