/// Central numerical tolerances. Every module reads its thresholds from here
/// so they can be audited (and tightened) in one place.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative entrywise symmetry requirement for `SymMatrix`.
    pub symmetry: f64,
    /// A matrix flagged PSD may have eigenvalues down to `-psd * |lambda|_max`.
    pub psd: f64,
    /// Eigendecomposition reconstruction error, relative to `max(1, ||A||_F)`.
    pub eig_reconstruction: f64,
    /// Orthonormality slack for eigenvector and projection matrices.
    pub orthonormality: f64,
    /// Quadratic forms in `[-norm_clamp, 0]` are clamped to zero before sqrt;
    /// anything below `-norm_clamp` is rejected.
    pub norm_clamp: f64,
    /// Gram-Schmidt images with norm below `gs_skip * max_initial_norm` are
    /// treated as zero and skipped in later orthogonalization steps.
    pub gs_skip: f64,
    /// Negative eigenvalues above `-sqrt_clamp * lambda_max` are clamped to
    /// zero when forming spectral square roots.
    pub sqrt_clamp: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symmetry: 1e-12,
            psd: 1e-9,
            eig_reconstruction: 1e-8,
            orthonormality: 1e-8,
            norm_clamp: 1e-12,
            gs_skip: 1e-10,
            sqrt_clamp: 1e-10,
        }
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        symmetry: 1e-12,
        psd: 1e-9,
        eig_reconstruction: 1e-8,
        orthonormality: 1e-8,
        norm_clamp: 1e-12,
        gs_skip: 1e-10,
        sqrt_clamp: 1e-10,
    };
}
