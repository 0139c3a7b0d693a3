//! Worst-case linear convergence rates of the fixed-step gradient method on
//! smooth, possibly non-convex functions satisfying the Polyak-Łojasiewicz
//! (PŁ) inequality and related growth conditions.
//!
//! The crate has three layers:
//!
//! * closed-form machinery: function-class constants and the conversion
//!   theorems between them ([`classes`]), and the per-step / N-step rate
//!   bounds together with the optimal fixed step length ([`rates`]);
//! * a performance-estimation pipeline: builders for the finite-dimensional
//!   Gram-matrix SDPs whose optima are the exact worst-case ratios ([`pep`]),
//!   a small dense primal-dual interior-point solver for them ([`sdp`]), and
//!   the explicit Lagrange-multiplier certificates that prove the closed-form
//!   bounds, verifiable both algebraically and as SDP duals ([`certify`]);
//! * an empirical layer: the gradient method and its accelerated variant on a
//!   zoo of test functions with certified class constants ([`sim`]).
//!
//! Everything is deterministic; random sampling takes explicit seeds.

pub mod certify;
pub mod classes;
pub mod pep;
pub mod rates;
pub mod sdp;
pub mod sim;

pub use classes::{CurvatureClass, DataPoint, FunctionClassSpec, GrowthSpec};
pub use pep::{GramBasis, PepProblem};
pub use rates::{RateBound, Regime, StepRegime};
pub use sdp::{SdpSolution, SdpStatus, SolveOptions};
pub use sim::{TestFunction, Trajectory};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constant or step length violates the precondition of the operation.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    /// Vectors of unequal dimension were combined.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// A non-finite value was produced or supplied.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    /// No usable points remained after filtering.
    #[error("empty effective grid: {0}")]
    EmptyGrid(String),
    /// The SDP solver failed in a way that is not a status.
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
