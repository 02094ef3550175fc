//! Hard-instance family from a random bipartite construction: a Bernoulli
//! incidence matrix `M` (n/100 rows, n columns) and the covariance
//! `Sigma = eps I + Proj_{ker M}`. The covariates on row supports carry sparse
//! dependencies, which defeats plain l1 methods; the rows themselves form an
//! l1-representation for bounded integer signals, recovered by a greedy
//! sign-majority peeling loop.
//!
//! The regime in which the construction's properties hold with high
//! probability needs k >= polylog(n)^5, far beyond desk scale. The property
//! checks therefore pass/fail against thresholds that were Monte-Carlo
//! calibrated once at n = 5000, k = 60 over 50 seeds and frozen here; see
//! `PropertyThresholds::default`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{eig, SymMatrix};
use crate::rng::rng_for;
use crate::{Matrix, Vector};

/// A sampled instance. `sigma` is not materialized: at the scales of interest
/// the `n x n` matrix is large, while everything the checks need (quadratic
/// forms, distances to the row span) reduces to the `r x r` Gram matrix of
/// the rows (`r = n/100`).
#[derive(Debug, Clone)]
pub struct ExpanderInstance {
    /// 0/1 incidence matrix, `r x n`.
    pub m: Matrix,
    /// Number of covariates (columns), rounded up to a multiple of 100.
    pub n: usize,
    /// Requested `n` before rounding.
    pub requested_n: usize,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    /// Pseudoinverse of `M M'` (pinned at construction).
    gram_pinv: Matrix,
    /// Per-row supports, ascending.
    row_support: Vec<Vec<usize>>,
    /// Per-column adjacent rows, ascending.
    col_support: Vec<Vec<usize>>,
}

impl ExpanderInstance {
    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn row_support(&self, j: usize) -> &[usize] {
        &self.row_support[j]
    }

    pub fn col_support(&self, i: usize) -> &[usize] {
        &self.col_support[i]
    }

    /// Projection of `v` onto the row span of `M`.
    pub fn project_rowspan(&self, v: &Vector) -> Vector {
        let mv = &self.m * v;
        let z = &self.gram_pinv * mv;
        self.m.transpose() * z
    }

    pub fn dist_to_rowspan(&self, v: &Vector) -> f64 {
        (v - self.project_rowspan(v)).norm()
    }

    /// `v' Sigma v = eps ||v||^2 + ||v - Proj_rowspan(v)||^2`: the kernel of
    /// `M` is the orthogonal complement of the row span.
    pub fn sigma_quad(&self, v: &Vector) -> f64 {
        let d = self.dist_to_rowspan(v);
        self.eps * v.norm_squared() + d * d
    }

    pub fn sigma_norm(&self, v: &Vector) -> f64 {
        self.sigma_quad(v).max(0.0).sqrt()
    }

    /// Dense covariance `eps I + (I - M'(MM')^+ M)`; quadratic in `n`, meant
    /// for small instances and cross-checks.
    pub fn sigma_matrix(&self) -> SymMatrix {
        let n = self.n;
        let proj_row = self.m.transpose() * &self.gram_pinv * &self.m;
        let m = Matrix::identity(n, n) * (1.0 + self.eps) - proj_row;
        SymMatrix::from_symmetric_unchecked((&m + m.transpose()) * 0.5)
    }

    /// Singular values of `M'` (descending), via the row Gram matrix.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let gram = &self.m * self.m.transpose();
        let e = eig(&SymMatrix::from_symmetric_unchecked(
            (&gram + gram.transpose()) * 0.5,
        ))?;
        let mut out: Vec<f64> = e.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        out.reverse();
        Ok(out)
    }
}

/// Samples `M` with i.i.d. Bernoulli(k/n) entries (row-major draw order) and
/// assembles the instance. `n` is rounded up to a multiple of 100.
pub fn gen_expander_sigma(n: usize, k: usize, eps: f64, seed: u64) -> Result<ExpanderInstance> {
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    let n_round = n.div_ceil(100) * 100;
    if k > n_round {
        return Err(Error::arg(format!("k = {k} exceeds n = {n_round}")));
    }
    if eps < 0.0 {
        return Err(Error::arg("eps must be nonnegative"));
    }
    let r = n_round / 100;
    let p = k as f64 / n_round as f64;
    let mut rng = rng_for(seed, 0);
    let mut m = Matrix::zeros(r, n_round);
    for i in 0..r {
        for j in 0..n_round {
            if rng.gen::<f64>() < p {
                m[(i, j)] = 1.0;
            }
        }
    }

    let gram = &m * m.transpose();
    let gram_pinv = pseudo_inverse(&gram)?;

    let mut row_support = vec![Vec::new(); r];
    let mut col_support = vec![Vec::new(); n_round];
    for i in 0..r {
        for j in 0..n_round {
            if m[(i, j)] > 0.5 {
                row_support[i].push(j);
                col_support[j].push(i);
            }
        }
    }

    Ok(ExpanderInstance {
        m,
        n: n_round,
        requested_n: n,
        k,
        eps,
        seed,
        gram_pinv,
        row_support,
        col_support,
    })
}

fn pseudo_inverse(sym: &Matrix) -> Result<Matrix> {
    let e = eig(&SymMatrix::from_symmetric_unchecked(
        (sym + sym.transpose()) * 0.5,
    ))?;
    let lmax = e.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cut = 1e-10 * f64::max(1.0, lmax);
    let mut scaled = e.eigenvectors.clone();
    for (i, mut col) in scaled.column_iter_mut().enumerate() {
        let l = e.eigenvalues[i];
        col *= if l.abs() > cut { 1.0 / l } else { 0.0 };
    }
    Ok(&scaled * e.eigenvectors.transpose())
}

/// Pass/fail thresholds for the property report. Calibrated at n = 5000,
/// k = 60 over 50 seeds (see the module docs); the degree checks use the
/// fraction of vertices inside the (1 +/- alpha) band because at desk scale
/// a uniform per-vertex bound holds with probability ~0.
#[derive(Debug, Clone, Copy)]
pub struct PropertyThresholds {
    /// Minimum fraction of columns with degree in the rounded
    /// `[(1-alpha)k/100, (1+alpha)k/100]` band.
    pub min_fraction_left: f64,
    /// Minimum fraction of rows with degree in `[(1-alpha)k, (1+alpha)k]`.
    pub min_fraction_right: f64,
    /// Maximum number of tree-likeness violations across sampled roots.
    pub max_tree_violations: usize,
    /// Largest even BFS radius at which the tree-likeness counts are checked.
    /// With only n/100 row vertices, shells beyond the first cover a constant
    /// fraction of the row side and the counts saturate (measured at n=5000,
    /// k=60: every second-shell row violates), so the calibrated default
    /// checks the first shell only.
    pub tree_check_max_radius: usize,
    /// Window for `sigma_min(M') / sqrt(k)` and `sigma_max(M') / sqrt(k)`.
    pub sv_ratio_window: (f64, f64),
    /// Number of BFS roots sampled for the tree-likeness checks (evenly
    /// spaced over the columns).
    pub bfs_roots: usize,
}

impl Default for PropertyThresholds {
    fn default() -> Self {
        PropertyThresholds {
            // calibration (50 seeds, n=5000, k=60, alpha=0.3): left fraction
            // in [0.863, 0.891], right fraction in [0.94, 1.00]
            min_fraction_left: 0.85,
            min_fraction_right: 0.90,
            // calibration: first-shell incident violations per seed over 64
            // roots had median 1, p90 = 4, max 8; back violations were zero
            max_tree_violations: 10,
            tree_check_max_radius: 0,
            // calibration: min ratios in [0.72, 0.86], max in [1.24, 1.34];
            // the default window is kept wide
            sv_ratio_window: (0.4, 2.5),
            bfs_roots: 64,
        }
    }
}

/// Report of the instance checks. Statistics are always filled; the booleans
/// compare them against the supplied thresholds.
#[derive(Debug, Clone)]
pub struct ExpanderReport {
    pub fraction_left_in_band: f64,
    pub fraction_right_in_band: f64,
    pub tree_violations_incident: usize,
    pub tree_violations_back: usize,
    pub sv_min_ratio: f64,
    pub sv_max_ratio: f64,
    pub pass_left_degrees: bool,
    pub pass_right_degrees: bool,
    pub pass_tree_incident: bool,
    pub pass_tree_back: bool,
    pub pass_singular_values: bool,
}

impl ExpanderReport {
    pub fn all_pass(&self) -> bool {
        self.pass_left_degrees
            && self.pass_right_degrees
            && self.pass_tree_incident
            && self.pass_tree_back
            && self.pass_singular_values
    }
}

/// Runs the degree, tree-likeness, and singular-value checks at band width
/// `alpha`.
pub fn check_expander_properties(
    inst: &ExpanderInstance,
    alpha: f64,
    thresholds: &PropertyThresholds,
) -> Result<ExpanderReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg("alpha must lie in (0, 1)"));
    }
    let kf = inst.k as f64;

    // (a) column degrees around k/100, band rounded outward to integers
    let lo_l = ((1.0 - alpha) * kf / 100.0).floor();
    let hi_l = ((1.0 + alpha) * kf / 100.0).ceil();
    let in_l = (0..inst.n)
        .filter(|&i| {
            let d = inst.col_support[i].len() as f64;
            d >= lo_l && d <= hi_l
        })
        .count();
    let fraction_left = in_l as f64 / inst.n as f64;

    // (b) row degrees around k
    let lo_r = (1.0 - alpha) * kf;
    let hi_r = (1.0 + alpha) * kf;
    let in_r = (0..inst.rows())
        .filter(|&j| {
            let d = inst.row_support[j].len() as f64;
            d >= lo_r && d <= hi_r
        })
        .count();
    let fraction_right = in_r as f64 / inst.rows() as f64;

    // (c) tree-likeness by BFS from sampled roots
    let (viol_incident, viol_back) =
        tree_likeness_violations(inst, thresholds.bfs_roots, thresholds.tree_check_max_radius);

    // (d) singular-value ratios
    let sv = inst.singular_values()?;
    let sk = kf.sqrt();
    let sv_max_ratio = sv.first().copied().unwrap_or(0.0) / sk;
    let sv_min_ratio = sv.last().copied().unwrap_or(0.0) / sk;

    Ok(ExpanderReport {
        fraction_left_in_band: fraction_left,
        fraction_right_in_band: fraction_right,
        tree_violations_incident: viol_incident,
        tree_violations_back: viol_back,
        sv_min_ratio,
        sv_max_ratio,
        pass_left_degrees: fraction_left >= thresholds.min_fraction_left,
        pass_right_degrees: fraction_right >= thresholds.min_fraction_right,
        pass_tree_incident: viol_incident <= thresholds.max_tree_violations,
        pass_tree_back: viol_back <= thresholds.max_tree_violations,
        pass_singular_values: sv_min_ratio >= thresholds.sv_ratio_window.0
            && sv_max_ratio <= thresholds.sv_ratio_window.1,
    })
}

/// BFS layers from sampled column roots; for every row vertex `j` on an odd
/// layer `r+1` (even `r`), counts
///   (i)  incident columns outside `N_r` whose neighborhood meets `N_{r+1}`
///        in more than one row vertex beyond 2 allowed,
///   (ii) back-edges into `N_r` beyond 2 allowed.
fn tree_likeness_violations(
    inst: &ExpanderInstance,
    roots: usize,
    max_radius: usize,
) -> (usize, usize) {
    let n = inst.n;
    let r_cap = (100.0 * (n.max(3) as f64).ln().ln().max(1.0)) as usize;
    let r_max = r_cap.min(max_radius);
    let step = (n / roots.max(1)).max(1);
    let mut viol_incident = 0usize;
    let mut viol_back = 0usize;

    // distances: columns and rows separately, usize::MAX = unreached
    for root in (0..n).step_by(step).take(roots) {
        let mut dist_col = vec![usize::MAX; n];
        let mut dist_row = vec![usize::MAX; inst.rows()];
        dist_col[root] = 0;
        let mut frontier_cols = vec![root];
        let mut level = 0usize;
        while !frontier_cols.is_empty() && level <= r_max {
            // expand to rows at distance level+1
            let mut next_rows = Vec::new();
            for &c in &frontier_cols {
                for &j in &inst.col_support[c] {
                    if dist_row[j] == usize::MAX {
                        dist_row[j] = level + 1;
                        next_rows.push(j);
                    }
                }
            }
            // checks at the odd layer level+1 (r = level even by construction)
            for &j in &next_rows {
                let mut incident_multi = 0usize;
                let mut back = 0usize;
                for &i in &inst.row_support[j] {
                    if dist_col[i] != usize::MAX && dist_col[i] <= level {
                        back += 1;
                        continue;
                    }
                    // count rows of N_{r+1} adjacent to column i
                    let mut meet = 0usize;
                    for &j2 in &inst.col_support[i] {
                        if dist_row[j2] != usize::MAX && dist_row[j2] <= level + 1 {
                            meet += 1;
                            if meet > 1 {
                                break;
                            }
                        }
                    }
                    if meet > 1 {
                        incident_multi += 1;
                    }
                }
                if incident_multi > 2 {
                    viol_incident += 1;
                }
                if back > 2 {
                    viol_back += 1;
                }
            }
            // expand to columns at distance level+2
            let mut next_cols = Vec::new();
            for &j in &next_rows {
                for &i in &inst.row_support[j] {
                    if dist_col[i] == usize::MAX {
                        dist_col[i] = level + 2;
                        next_cols.push(i);
                    }
                }
            }
            frontier_cols = next_cols;
            level += 2;
        }
    }
    (viol_incident, viol_back)
}

/// First row whose support sees a strict sign majority of `v`: some `j` with
/// more than `k/2` strictly positive (checked first) or strictly negative
/// entries of `v` on the support. Scan order is ascending `j`.
pub fn majority_sign_row(inst: &ExpanderInstance, v: &[i64]) -> Option<(usize, i64)> {
    let half = inst.k as f64 / 2.0;
    for j in 0..inst.rows() {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for &i in &inst.row_support[j] {
            if v[i] > 0 {
                pos += 1;
            } else if v[i] < 0 {
                neg += 1;
            }
        }
        if pos as f64 > half {
            return Some((j, 1));
        }
        if neg as f64 > half {
            return Some((j, -1));
        }
    }
    None
}

/// Result of the greedy integer peeling.
#[derive(Debug, Clone)]
pub struct GreedyRep {
    /// Signed row multiplicities.
    pub beta: Vector,
    /// Residual after peeling (zero on full success).
    pub residual: Vector,
    /// Set when the loop stopped because the signal is far from the row span
    /// and is served by the standard basis instead.
    pub standard_basis_branch: bool,
    pub steps: usize,
}

impl GreedyRep {
    /// `sum_j |beta_j| ||M_j||_Sigma` for the instance's covariance; rows lie
    /// in the row span, so `||M_j||_Sigma = sqrt(eps) ||M_j||_2`.
    pub fn weighted_cost(&self, inst: &ExpanderInstance) -> f64 {
        let mut acc = 0.0;
        for j in 0..inst.rows() {
            if self.beta[j] != 0.0 {
                let nrm = (inst.row_support[j].len() as f64).sqrt();
                acc += self.beta[j].abs() * inst.eps.sqrt() * nrm;
            }
        }
        acc
    }
}

/// Greedy peeling of an integer signal over the rows: while the residual is
/// within distance 1/3 of the row span, find a sign-majority row, add +/-1 to
/// its coefficient, and subtract. Every accepted step must shrink the l1 norm
/// by at least one (integer arithmetic, asserted exactly); a residual with no
/// qualifying row is a counterexample and surfaces as an error rather than
/// being absorbed.
pub fn greedy_integer_representation(
    inst: &ExpanderInstance,
    v: &Vector,
    max_steps: Option<usize>,
) -> Result<GreedyRep> {
    let n = inst.n;
    if v.len() != n {
        return Err(Error::dim(format!("signal has length {}, expected {n}", v.len())));
    }
    let mut cur: Vec<i64> = Vec::with_capacity(n);
    for &x in v.iter() {
        let r = x.round();
        if (x - r).abs() > 1e-9 {
            return Err(Error::arg(format!("signal entry {x} is not an integer")));
        }
        cur.push(r as i64);
    }
    let l1_of = |w: &[i64]| -> i64 { w.iter().map(|x| x.abs()).sum() };
    let to_vector = |w: &[i64]| Vector::from_iterator(n, w.iter().map(|&x| x as f64));

    let limit = max_steps.unwrap_or_else(|| l1_of(&cur).max(1) as usize);
    let mut beta = Vector::zeros(inst.rows());
    let mut steps = 0usize;
    loop {
        let l1 = l1_of(&cur);
        if l1 == 0 {
            return Ok(GreedyRep {
                beta,
                residual: Vector::zeros(n),
                standard_basis_branch: false,
                steps,
            });
        }
        let vf = to_vector(&cur);
        if inst.dist_to_rowspan(&vf) >= 1.0 / 3.0 {
            return Ok(GreedyRep {
                beta,
                residual: vf,
                standard_basis_branch: true,
                steps,
            });
        }
        if steps >= limit {
            return Err(Error::NoConvergence {
                iterations: steps,
                what: format!("greedy peeling still has l1 = {l1}"),
            });
        }
        let (j, sign) = majority_sign_row(inst, &cur).ok_or(Error::SignAgreement {
            l1,
            dist: inst.dist_to_rowspan(&vf),
        })?;
        for &i in &inst.row_support[j] {
            cur[i] -= sign;
        }
        let l1_new = l1_of(&cur);
        if l1_new > l1 - 1 {
            return Err(Error::NoL1Decrease {
                row: j,
                before: l1,
                after: l1_new,
            });
        }
        beta[j] += sign as f64;
        steps += 1;
    }
}

/// Experimental: the same greedy loop on real-valued signals. The sign
/// majority is conjectured to help beyond integers, but nothing is guaranteed
/// here — the loop simply stops once the l1 norm no longer drops by at least
/// one per step, and the caller gets whatever residual remains.
pub fn greedy_real_representation(
    inst: &ExpanderInstance,
    v: &Vector,
    max_steps: usize,
) -> Result<GreedyRep> {
    let n = inst.n;
    if v.len() != n {
        return Err(Error::dim(format!("signal has length {}, expected {n}", v.len())));
    }
    let mut cur = v.clone();
    let mut beta = Vector::zeros(inst.rows());
    let mut steps = 0usize;
    let sign_of = |w: &Vector, i: usize| -> i64 {
        if w[i] > 0.0 {
            1
        } else if w[i] < 0.0 {
            -1
        } else {
            0
        }
    };
    loop {
        let l1: f64 = cur.iter().map(|x| x.abs()).sum();
        if l1 <= 1e-12 || steps >= max_steps || inst.dist_to_rowspan(&cur) >= 1.0 / 3.0 {
            return Ok(GreedyRep {
                beta,
                residual: cur,
                standard_basis_branch: false,
                steps,
            });
        }
        let signs: Vec<i64> = (0..n).map(|i| sign_of(&cur, i)).collect();
        let half = inst.k as f64 / 2.0;
        let mut found = None;
        for j in 0..inst.rows() {
            let mut pos = 0usize;
            let mut neg = 0usize;
            for &i in &inst.row_support[j] {
                match signs[i] {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => {}
                }
            }
            if pos as f64 > half {
                found = Some((j, 1.0));
                break;
            }
            if neg as f64 > half {
                found = Some((j, -1.0));
                break;
            }
        }
        let Some((j, sign)) = found else {
            return Ok(GreedyRep {
                beta,
                residual: cur,
                standard_basis_branch: false,
                steps,
            });
        };
        let mut next = cur.clone();
        for &i in &inst.row_support[j] {
            next[i] -= sign;
        }
        let l1_next: f64 = next.iter().map(|x| x.abs()).sum();
        if l1_next > l1 - 1.0 {
            // no meaningful progress; return as-is rather than asserting
            return Ok(GreedyRep {
                beta,
                residual: cur,
                standard_basis_branch: false,
                steps,
            });
        }
        cur = next;
        beta[j] += sign;
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::approx_eq;

    #[test]
    fn generation_is_reproducible_and_rounds_n() {
        let a = gen_expander_sigma(250, 10, 1e-3, 4).unwrap();
        assert_eq!(a.n, 300);
        assert_eq!(a.requested_n, 250);
        let b = gen_expander_sigma(250, 10, 1e-3, 4).unwrap();
        assert_eq!(a.m, b.m);
        assert!(gen_expander_sigma(100, 200, 1e-3, 0).is_err());
    }

    #[test]
    fn sigma_matrix_matches_eig_construction() {
        // Cross-check the Gram-based projection against the eigendecomposition
        // of M'M on a small instance.
        let inst = gen_expander_sigma(200, 8, 1e-3, 1).unwrap();
        let direct = inst.sigma_matrix();
        let mtm = inst.m.transpose() * &inst.m;
        let e = eig(&SymMatrix::from_symmetric_unchecked((&mtm + mtm.transpose()) * 0.5)).unwrap();
        let mut proj_ker = Matrix::zeros(inst.n, inst.n);
        for (i, col) in e.eigenvectors.column_iter().enumerate() {
            if e.eigenvalues[i] <= 1e-10 {
                proj_ker += col * col.transpose();
            }
        }
        let via_eig = Matrix::identity(inst.n, inst.n) * inst.eps + proj_ker;
        assert!(
            (direct.as_matrix() - &via_eig).norm() <= 1e-8 * f64::max(1.0, via_eig.norm()),
            "constructions disagree"
        );
    }

    #[test]
    fn eps_zero_gives_projection() {
        let inst = gen_expander_sigma(200, 8, 0.0, 2).unwrap();
        let s = inst.sigma_matrix();
        let sq = s.as_matrix() * s.as_matrix();
        assert!((sq - s.as_matrix()).norm() <= 1e-8);
    }

    #[test]
    fn row_sigma_norm_is_sqrt_eps_times_l2() {
        let inst = gen_expander_sigma(300, 12, 1e-4, 3).unwrap();
        for j in 0..inst.rows() {
            let row = inst.m.row(j).transpose().into_owned();
            let expect = inst.eps.sqrt() * row.norm();
            assert!(
                approx_eq(inst.sigma_norm(&row), expect, 1e-6),
                "row {j}: {} vs {expect}",
                inst.sigma_norm(&row)
            );
        }
    }

    #[test]
    fn rank_audit_at_k_equals_n() {
        // k = n makes every entry Bernoulli(1): M is all ones, rank 1.
        let inst = gen_expander_sigma(100, 100, 0.0, 5).unwrap();
        assert!(inst.m.iter().all(|&x| x == 1.0));
        let sv = inst.singular_values().unwrap();
        assert!(sv[0] > 0.0);
        assert!(sv.iter().skip(1).all(|&s| s <= 1e-8 * sv[0]));
    }

    #[test]
    fn deterministic_star_instance_passes_degree_checks() {
        // block-diagonal disjoint stars: exact degrees
        let mut inst = gen_expander_sigma(200, 4, 1e-3, 6).unwrap();
        let r = inst.rows();
        let mut m = Matrix::zeros(r, inst.n);
        for j in 0..r {
            for c in 0..4 {
                m[(j, (j * 100 + c) % inst.n)] = 1.0;
            }
        }
        // degrees: rows exactly 4 = k, columns 0 or 1 vs k/100 = 0.04 band [0,1]
        inst.m = m.clone();
        inst.row_support = (0..r)
            .map(|j| (0..inst.n).filter(|&i| m[(j, i)] > 0.5).collect())
            .collect();
        inst.col_support = (0..inst.n)
            .map(|i| (0..r).filter(|&j| m[(j, i)] > 0.5).collect())
            .collect();
        let th = PropertyThresholds::default();
        let rep = check_expander_properties(&inst, 0.3, &th).unwrap();
        assert!(rep.pass_left_degrees && rep.pass_right_degrees);
    }

    #[test]
    fn majority_row_examples() {
        let inst = gen_expander_sigma(400, 16, 1e-4, 7).unwrap();
        // v = first row: every supported entry is +1
        let v: Vec<i64> = (0..inst.n)
            .map(|i| if inst.m[(0, i)] > 0.5 { 1 } else { 0 })
            .collect();
        if inst.row_support[0].len() as f64 > inst.k as f64 / 2.0 {
            let (j, s) = majority_sign_row(&inst, &v).unwrap();
            assert_eq!(j, 0);
            assert_eq!(s, 1);
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            let (j, s) = majority_sign_row(&inst, &neg).unwrap();
            assert_eq!(j, 0);
            assert_eq!(s, -1);
        }
        // standard basis vector: at most one nonzero per row support
        let mut e1 = vec![0i64; inst.n];
        e1[0] = 1;
        assert!(majority_sign_row(&inst, &e1).is_none());
    }

    #[test]
    fn greedy_recovers_row_sums() {
        let inst = gen_expander_sigma(500, 20, 1e-4, 8).unwrap();
        let row_sum = inst.m.row(0).transpose().into_owned() + inst.m.row(1).transpose();
        let rep = greedy_integer_representation(&inst, &row_sum, None).unwrap();
        assert!(!rep.standard_basis_branch);
        assert!(rep.residual.norm() == 0.0);
        assert!(approx_eq(rep.beta[0], 1.0, 1e-12));
        assert!(approx_eq(rep.beta[1], 1.0, 1e-12));
        let l1: f64 = rep.beta.iter().map(|b| b.abs()).sum();
        let v_l1: f64 = row_sum.iter().map(|x| x.abs()).sum();
        assert!(l1 <= v_l1);
    }

    #[test]
    fn greedy_far_signal_takes_standard_basis_branch() {
        let inst = gen_expander_sigma(300, 12, 1e-4, 9).unwrap();
        let mut v = Vector::zeros(inst.n);
        v[0] = 3.0;
        v[7] = -2.0;
        assert!(inst.dist_to_rowspan(&v) >= 1.0 / 3.0);
        let rep = greedy_integer_representation(&inst, &v, None).unwrap();
        assert!(rep.standard_basis_branch);
        assert_eq!(rep.steps, 0);
        assert!(rep.beta.norm() == 0.0);
        assert_eq!(rep.residual, v);
    }

    #[test]
    fn greedy_rejects_non_integer() {
        let inst = gen_expander_sigma(100, 4, 1e-4, 10).unwrap();
        let mut v = Vector::zeros(inst.n);
        v[0] = 0.5;
        assert!(greedy_integer_representation(&inst, &v, None).is_err());
    }

    #[test]
    fn greedy_real_variant_runs_without_guarantees() {
        let inst = gen_expander_sigma(500, 20, 1e-4, 14).unwrap();
        // a slightly perturbed row sum: still mostly peels, never panics
        let mut v = inst.m.row(0).transpose().into_owned() * 2.0;
        v[0] += 0.25;
        let rep = greedy_real_representation(&inst, &v, 100).unwrap();
        let before: f64 = v.iter().map(|x| x.abs()).sum();
        let after: f64 = rep.residual.iter().map(|x| x.abs()).sum();
        assert!(after <= before);
    }

    #[test]
    fn standard_basis_decorrelates_from_rows() {
        // |<e_i, M_j>_Sigma| <= sqrt(eps) ||e_i||_Sigma ||M_j||_Sigma (1 + 1e-6):
        // the rows live in the eps-scaled row span while basis vectors keep
        // most of their mass in the kernel.
        let inst = gen_expander_sigma(1000, 30, 1e-4, 11).unwrap();
        let se = inst.eps.sqrt();
        for j in (0..inst.rows()).step_by(3) {
            let row = inst.m.row(j).transpose().into_owned();
            let row_norm = inst.sigma_norm(&row);
            for i in (0..inst.n).step_by(97) {
                let mut e_i = Vector::zeros(inst.n);
                e_i[i] = 1.0;
                // <e_i, Sigma M_j'> = eps * M_j[i] since the row is span-internal
                let lhs = inst.eps * inst.m[(j, i)];
                let rhs = se * inst.sigma_norm(&e_i) * row_norm * (1.0 + 1e-6);
                assert!(lhs <= rhs, "corollary inequality violated at ({i},{j})");
            }
        }
    }

    #[test]
    fn w_r_representation_certificate() {
        // signed sums of R <= 5 rows are recovered with residual zero and
        // weighted cost within R sqrt(k) of the signal's Sigma-norm
        let inst = gen_expander_sigma(2000, 40, 1e-4, 12).unwrap();
        let sqrt_k = (inst.k as f64).sqrt();
        let mut rng = rng_for(13, 0);
        for r_rows in 1..=5usize {
            let mut v = Vector::zeros(inst.n);
            let mut used = std::collections::BTreeSet::new();
            for _ in 0..r_rows {
                let mut j = rng.gen_range(0..inst.rows());
                while used.contains(&j) {
                    j = rng.gen_range(0..inst.rows());
                }
                used.insert(j);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                v += inst.m.row(j).transpose() * sign;
            }
            let rep = greedy_integer_representation(&inst, &v, None).unwrap();
            assert!(rep.residual.norm() == 0.0);
            let l1_beta: f64 = rep.beta.iter().map(|b| b.abs()).sum();
            let v_l1: f64 = v.iter().map(|x| x.abs()).sum();
            assert!(l1_beta <= v_l1, "one unit of l1 consumed per step");
            let cost = rep.weighted_cost(&inst);
            let bound = r_rows as f64 * sqrt_k * inst.sigma_norm(&v) * (1.0 + 1e-6);
            assert!(cost <= bound, "cost {cost} above {bound}");
        }
    }
}
