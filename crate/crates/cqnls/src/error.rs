//! Error type shared by all solver modules.

use thiserror::Error;

/// Everything that can go wrong across grid construction, stationary
/// solves, time evolution, experiments and persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spatial dimension must be 2 or 3, got {0}")]
    InvalidDimension(u32),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("sample count {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("evaluation point s = {s} outside [0, {s0}]")]
    OutOfDomain { s: f64, s0: f64 },

    #[error("frequency omega = {0} outside the admissible range (0, 3/16)")]
    OmegaOutOfRange(f64),

    #[error("deformation alpha = {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("Newton iteration did not converge after {iters} iterations (omega = {omega}, alpha = {alpha}, residual = {residual:.3e})")]
    NoConvergence {
        omega: f64,
        alpha: f64,
        iters: usize,
        residual: f64,
    },

    #[error("iterate collapsed onto the trivial solution (omega = {omega}, alpha = {alpha})")]
    TrivialCollapse { omega: f64, alpha: f64 },

    #[error("singular Jacobian in the Newton linear solve (omega = {omega}, alpha = {alpha})")]
    SingularJacobian { omega: f64, alpha: f64 },

    #[error("alpha continuation stalled at alpha = {alpha} (omega = {omega}): step underflow")]
    AdaptiveFail { omega: f64, alpha: f64 },

    #[error("branch continuation could not reach omega = {0:?}")]
    BranchGap(Vec<f64>),

    #[error("unsupported Lp exponent {0}; only p = 2, 4, 6")]
    UnsupportedExponent(u32),

    #[error("stage matrix factorization failed (tau = {0})")]
    FactorizationFailure(f64),

    #[error("relative energy deviation {delta_e:.3e} breached the ceiling at t = {time}")]
    AccuracyLost { time: f64, delta_e: f64 },

    #[error("non-finite field values detected at t = {time}")]
    NonFiniteField { time: f64 },

    #[error("branch library is empty")]
    EmptyBranch,

    #[error("mass curve is monotone over the branch; no interior extremum")]
    NoInteriorExtremum,

    #[error("invalid perturbation spec `{0}`")]
    InvalidPerturbation(String),

    #[error("malformed record: {0}")]
    MalformedRecord(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
