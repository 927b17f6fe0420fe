use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("vectors do not form a positive/negative pair")]
    NotIndefinitePair,
    #[error("gram form is degenerate (isotropic subspace of dimension {kernel_dim})")]
    DegenerateForm { kernel_dim: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("not a fundamental symmetry (residual {residual:.3e})")]
    InvalidSymmetry { residual: f64 },
    #[error("operator is not J-self-adjoint (residual {residual:.3e})")]
    NotJSelfAdjoint { residual: f64 },
    #[error("state is not normalized ((phi,phi) = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("negative radicand {value:.3e} exceeds the rounding clamp")]
    NegativeRadicand { value: f64 },
    #[error("quantity expected to be real has imaginary part {value:.3e}")]
    ImaginaryResidual { value: f64 },
    #[error("pencil dimension {dim} exceeds the limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("B is singular but shares no kernel with A (condition {condition:.3e})")]
    SingularBWithoutDegeneracy { condition: f64 },
    #[error("report is degenerate, no eigenpairs to check")]
    DegenerateReport,
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("J does not commute with the operator (residual {residual:.3e})")]
    SymmetryCommutatorViolated { residual: f64 },
    #[error("invalid commutator spec: {0}")]
    InvalidCommutatorSpec(String),
    #[error("relation {0} requires a commutator spec")]
    MissingCommutatorSpec(&'static str),
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too narrow: need |x| >= {required:.4} at both ends")]
    GridTooNarrow { required: f64 },
    #[error("iteration diverged at step {step} (value {value:.3e})")]
    DivergentIteration { step: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed matrix json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
