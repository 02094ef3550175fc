//! l1-representation construction for arbitrary covariances from samples, and
//! the end-to-end sparse regression estimator built on it.
//!
//! The construction works on the normalized columns of the design matrix:
//! partition them into ceil(sqrt(n)) groups; for every (t-1)-subset and every
//! group, take the group point closest to the subset's span and record the
//! projection residual as an atom; for every (t-2)-subset and ordered pair
//! within a group, record the orthonormalization coefficients of the pooled
//! t vectors. The nearest-subspace query is an exact linear scan over the
//! group (approximation factor 1).

use itertools::Itertools;

use crate::dict::{count_combinations, Dictionary, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt_general, SampleSet};
use crate::solvers::{mirror_descent_lasso, FitReport, SolverConfig};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// Normalized design-matrix columns with their original norms and the group
/// partition.
#[derive(Debug, Clone)]
pub struct ColumnGeometry {
    /// Unit vectors in R^m, one per retained column.
    pub points: Vec<Vector>,
    /// Original column l2 norms (zero for dropped columns).
    pub norms: Vec<f64>,
    /// Partition of the retained column indices into ceil(sqrt(n)) groups of
    /// size at most ceil(sqrt(n)).
    pub groups: Vec<Vec<usize>>,
    /// Column indices dropped because their norm vanished.
    pub dropped: Vec<usize>,
    /// Ambient dimension (number of columns of the design matrix).
    pub n: usize,
}

impl ColumnGeometry {
    /// Builds from an `m x n` design matrix. Zero columns are dropped with a
    /// record; the caller decides whether that is fatal.
    pub fn from_design(x: &Matrix) -> Result<Self> {
        let (m, n) = (x.nrows(), x.ncols());
        if m == 0 || n == 0 {
            return Err(Error::arg("empty design matrix"));
        }
        let mut points = Vec::with_capacity(n);
        let mut norms = vec![0.0; n];
        let mut retained = Vec::with_capacity(n);
        let mut dropped = Vec::new();
        for (j, norm_slot) in norms.iter_mut().enumerate() {
            let col = x.column(j).into_owned();
            let nrm = col.norm();
            if nrm <= 1e-300 {
                dropped.push(j);
                continue;
            }
            *norm_slot = nrm;
            points.push(col / nrm);
            retained.push(j);
        }
        if points.is_empty() {
            return Err(Error::arg("all design columns are zero"));
        }
        // ceil(sqrt(n)) groups of contiguous retained indices, sizes within one.
        let g = (n as f64).sqrt().ceil() as usize;
        let g = g.max(1);
        let total = retained.len();
        let mut groups = Vec::with_capacity(g);
        let base = total / g;
        let extra = total % g;
        let mut cursor = 0usize;
        for gi in 0..g {
            let len = base + usize::from(gi < extra);
            groups.push((cursor..cursor + len).collect::<Vec<usize>>());
            cursor += len;
        }
        debug_assert_eq!(cursor, total);
        Ok(ColumnGeometry {
            points,
            norms,
            groups,
            dropped,
            n,
        })
    }
}

/// Exact nearest point to a subspace: returns the index (into `points`)
/// minimizing the distance to `span(basis)`, ties to the lowest index.
pub fn nearest_subspace_index(points: &[Vector], basis: &[Vector]) -> Result<(usize, f64)> {
    if points.is_empty() {
        return Err(Error::arg("nearest_subspace_index needs a nonempty point set"));
    }
    let tol = Tolerances::DEFAULT;
    let ortho: Vec<Vector> = if basis.is_empty() {
        Vec::new()
    } else {
        let gs = gram_schmidt_general(basis, |a, b| a.dot(b), &tol)?;
        gs.images
            .into_iter()
            .zip(gs.zero)
            .filter(|(_, z)| !z)
            .map(|(v, _)| v)
            .collect()
    };
    let mut best = (0usize, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let mut dist_sq = p.norm_squared();
        for q in &ortho {
            let c = p.dot(q);
            dist_sq -= c * c;
        }
        let d = dist_sq.max(0.0).sqrt();
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

/// Atom budget of the construction:
/// `ceil(sqrt(n)) * C(n, t-1) + t * sum_j |I_j|^2 * C(n, t-2)`.
pub fn representation_size(geom: &ColumnGeometry, t: usize) -> u128 {
    let n_active = geom.points.len();
    let first = geom.groups.len() as u128 * count_combinations(n_active, t - 1);
    let pair_terms: u128 = geom.groups.iter().map(|g| (g.len() * g.len()) as u128).sum();
    let second = t as u128 * pair_terms * count_combinations(n_active, t.saturating_sub(2));
    first + second
}

fn embed(coeff: &[(usize, f64)], n: usize) -> Vector {
    let mut v = Vector::zeros(n);
    for &(i, c) in coeff {
        v[i] += c;
    }
    v
}

/// The full atom list over the normalized points. Every atom is `t`-sparse
/// (as a coefficient vector over the columns). Deterministic order: groups
/// ascending, then subsets in lexicographic order, then pairs row-major.
pub fn represent_vectors(geom: &ColumnGeometry, t: usize, budget: u128) -> Result<Vec<Vector>> {
    if t < 2 {
        return Err(Error::arg("representation needs t >= 2 (t = 1 is trivial)"));
    }
    if t > 4 {
        return Err(Error::arg(format!(
            "t = {t} rejected: the atom budget grows like n^(t - 1/2)"
        )));
    }
    let size = representation_size(geom, t);
    if size > budget {
        return Err(Error::BudgetExceeded {
            base: geom.points.len(),
            candidates: size,
            cap: budget.min(u64::MAX as u128) as u64,
        });
    }
    let n_active = geom.points.len();
    let tol = Tolerances::DEFAULT;
    let mut atoms: Vec<Vector> = Vec::with_capacity(size as usize);

    // Retained-index -> original column index map (points are stored in
    // retained order; norms/dropped are in original indexing).
    let active: Vec<usize> = (0..geom.n)
        .filter(|j| !geom.dropped.contains(j))
        .collect();

    for group in &geom.groups {
        // residual atoms: one per (t-1)-subset
        for subset in (0..n_active).combinations(t - 1) {
            let basis: Vec<Vector> = subset.iter().map(|&i| geom.points[i].clone()).collect();
            let group_points: Vec<Vector> =
                group.iter().map(|&i| geom.points[i].clone()).collect();
            let (local, _) = nearest_subspace_index(&group_points, &basis)?;
            let h = group[local];
            // projection coefficients by ridge-regularized normal equations
            let k = basis.len();
            let mut gram = Matrix::zeros(k, k);
            let mut rhs = Vector::zeros(k);
            for a in 0..k {
                for b in 0..k {
                    gram[(a, b)] = basis[a].dot(&basis[b]);
                }
                rhs[a] = basis[a].dot(&geom.points[h]);
            }
            for a in 0..k {
                gram[(a, a)] += 1e-12;
            }
            let gamma = gram
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::arg("projection system solve failed"))?;
            let mut coeff: Vec<(usize, f64)> = subset
                .iter()
                .zip(gamma.iter())
                .map(|(&i, &c)| (active[i], c))
                .collect();
            coeff.push((active[h], -1.0));
            atoms.push(embed(&coeff, geom.n));
        }

        // orthonormalization atoms: t per (t-2)-subset and ordered pair
        let base_subsets: Vec<Vec<usize>> = if t == 2 {
            vec![Vec::new()]
        } else {
            (0..n_active).combinations(t - 2).collect()
        };
        for subset in &base_subsets {
            for &a in group {
                for &b in group {
                    let mut list_idx: Vec<usize> = subset.clone();
                    list_idx.push(a);
                    list_idx.push(b);
                    let list: Vec<Vector> =
                        list_idx.iter().map(|&i| geom.points[i].clone()).collect();
                    let gs = gram_schmidt_general(&list, |p, q| p.dot(q), &tol)?;
                    for coeffs in gs.coeffs {
                        let mapped: Vec<(usize, f64)> = list_idx
                            .iter()
                            .zip(coeffs.iter())
                            .map(|(&i, &c)| (active[i], c))
                            .collect();
                        atoms.push(embed(&mapped, geom.n));
                    }
                }
            }
        }
    }

    debug_assert_eq!(atoms.len() as u128, size);
    Ok(atoms)
}

/// Dictionary built from samples: normalize columns, run the construction,
/// undo the column scaling so atoms act on the raw covariates, and cache the
/// empirical norms `||X d|| / sqrt(m)`. Requires `m >= min_sample_factor * t * ln n`.
pub fn compute_l1_representation(
    x: &Matrix,
    t: usize,
    min_sample_factor: f64,
    budget: u128,
) -> Result<Dictionary> {
    let (m, n) = (x.nrows(), x.ncols());
    let need = min_sample_factor * t as f64 * (n.max(2) as f64).ln();
    if (m as f64) < need {
        return Err(Error::arg(format!(
            "need at least {need:.0} samples for the representation, got {m}"
        )));
    }
    let geom = ColumnGeometry::from_design(x)?;
    if !geom.dropped.is_empty() {
        eprintln!(
            "warning: dropped zero columns {:?} from the representation",
            geom.dropped
        );
    }
    let tilde = represent_vectors(&geom, t, budget)?;
    // Undo the normalization: an atom d~ over the unit columns corresponds to
    // d with d_i = d~_i / ||q_i||, since sum_i d~_i p_i = X d.
    let mut atoms = Vec::with_capacity(tilde.len());
    let mut norms = Vec::with_capacity(tilde.len());
    let sqrt_m = (m as f64).sqrt();
    for dt in tilde {
        let mut d = dt;
        for i in 0..n {
            if geom.norms[i] > 0.0 {
                d[i] /= geom.norms[i];
            } else {
                d[i] = 0.0;
            }
        }
        let emp = (x * &d).norm() / sqrt_m;
        atoms.push(d);
        norms.push(emp);
    }
    Dictionary::with_norms(atoms, norms, Provenance::ArbitraryRep)
}

/// End-to-end estimator for arbitrary covariance: build the dictionary from
/// the first `100 t ln n` samples, form one feature per atom normalized by
/// its first-half empirical norm, run mirror descent with l1 budget
/// `2 c_l1rep t^{3/2} B ln n` for `m/2` iterations on the second half, and
/// fold the feature weights back to covariate space.
pub fn slr_arbitrary(
    samples: &SampleSet,
    t: usize,
    b_radius: f64,
    c_l1rep: f64,
    cfg: &SolverConfig,
) -> Result<FitReport> {
    let (m, n) = (samples.m(), samples.n());
    if b_radius <= 0.0 {
        return Err(Error::arg("the Sigma-norm budget B must be positive"));
    }
    let need = 200.0 * t as f64 * (n.max(2) as f64).ln();
    if (m as f64) < need {
        return Err(Error::arg(format!(
            "need at least {need:.0} samples (half for the dictionary), got {m}"
        )));
    }
    let m_dict = ((100.0 * t as f64 * (n.max(2) as f64).ln()).ceil() as usize).min(m / 2);
    let dict_block = samples.x.rows(0, m_dict).into_owned();
    let dict = compute_l1_representation(&dict_block, t, 100.0, u128::MAX)?;

    let half = m / 2;
    // Per-atom normalizers from the first half: ||d||_{Sigma_hat}.
    let first = samples.x.rows(0, half);
    let mut scale = Vec::with_capacity(dict.len());
    for d in dict.atoms() {
        let xd = first * d;
        scale.push((xd.norm_squared() / half as f64).sqrt());
    }
    let max_scale = scale.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..dict.len())
        .filter(|&i| scale[i] > 1e-12 * f64::max(1.0, max_scale))
        .collect();
    if keep.is_empty() {
        return Err(Error::arg("every dictionary atom has vanishing empirical norm"));
    }

    let rest = m - half;
    let mut feat = Matrix::zeros(rest, keep.len());
    for (c, &ai) in keep.iter().enumerate() {
        let col = samples.x.rows(half, rest) * dict.atom(ai) / scale[ai];
        feat.set_column(c, &col);
    }
    let y2 = samples.y.rows(half, rest).into_owned();

    let budget = 2.0 * c_l1rep * (t as f64).powf(1.5) * b_radius * (n.max(2) as f64).ln();
    let iters = half.max(1);
    let md = mirror_descent_lasso(&feat, &y2, budget, iters, cfg)?;

    let mut w = Vector::zeros(n);
    for (c, &ai) in keep.iter().enumerate() {
        w += dict.atom(ai) * (md.v_hat[c] / scale[ai]);
    }
    let mut rep = FitReport::new(w, md.objective, md.iterations, md.converged);
    rep.seed = samples.seed;
    rep.note = Some(format!(
        "slr atoms={} kept={} budget={budget:.3} iters={iters}",
        dict.len(),
        keep.len()
    ));
    Ok(rep)
}
