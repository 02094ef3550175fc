//! Sparse linear regression under ill-conditioned Gaussian designs.
//!
//! The toolkit centers on feature adaptation: discover the coordinates that
//! participate in sparse approximate dependencies of the covariance (module
//! [`peel`]), then either exempt them from l1 regularization ([`solvers`],
//! [`boost`]) or build explicit l1-representation dictionaries over them
//! ([`dict`], [`arbitrary`]). Synthetic instance generators ([`synth`]) and
//! the expander hard-instance family ([`expander`]) support benchmarking.

pub mod arbitrary;
pub mod boost;
pub mod dict;
pub mod error;
pub mod expander;
pub mod io;
pub mod linalg;
pub mod peel;
pub mod rng;
pub mod solvers;
pub mod synth;
pub mod testutil;
pub mod tol;

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

pub use error::{Error, Result};
pub use linalg::{
    eig, gram_schmidt_general, projection_top, sample_gaussian, sigma_inner, sigma_norm,
    EigenDecomp, GramSchmidt, SampleSet, SymMatrix,
};
pub use peel::{find_heavy_coordinates, iterative_peeling, PeelResult};
pub use solvers::{FitReport, SolverConfig};
pub use tol::Tolerances;
