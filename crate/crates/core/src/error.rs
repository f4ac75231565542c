use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (‖M − M*‖ = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("iteration budget exhausted in {routine}")]
    NoConvergence { routine: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation requires a map defined on the full matrix algebra")]
    DomainNotFullAlgebra,

    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: usize, found: usize },

    #[error("functional or map is not positive (minimum {min:.3e})")]
    NotPositive { min: f64 },

    #[error("invalid state weights: {0}")]
    WeightMismatch(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("no faithful invariant state: {0}")]
    NoFaithfulInvariantState(String),

    #[error("fixed-point space is not closed under products (residual {residual:.3e})")]
    ClosureViolation { residual: f64 },

    #[error("rejection sampler acceptance rate too small ({rate:.3e})")]
    RejectionBudgetExceeded { rate: f64 },

    #[error("the depolarizing decomposition is degenerate for n = 1")]
    DegenerateDimension,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("semidefinite problem is infeasible (certificate value {certificate_value:.3e})")]
    Infeasible { certificate_value: f64 },

    #[error("alpha = {alpha} outside extension interval [{beta1}, {beta2}]")]
    AlphaOutOfRange { alpha: f64, beta1: f64, beta2: f64 },

    #[error("no faithful extension found (best margin {margin:.3e}); inconclusive")]
    NoFaithfulExtensionFound { margin: f64 },

    #[error("map is not bijective between the spans")]
    NotBijective,

    #[error("map is not unital (‖I(1) − 1‖ = {residual:.3e})")]
    NotUnital { residual: f64 },

    #[error("unitary search inconclusive (best residual {residual:.3e})")]
    Inconclusive { residual: f64 },

    #[error("element is not in the required corner: {0}")]
    CornerMembershipViolation(String),

    #[error("function system does not separate points")]
    NotSeparating,

    #[error("map is not induced by a point permutation: {0}")]
    NoConsistentPermutation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
