use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// The requested preset or operation is not defined in this ambient dimension.
    #[error("unsupported ambient dimension {dim} for {what}")]
    UnsupportedDimension { dim: usize, what: String },

    /// An opening angle lies outside the preset's valid range.
    #[error("omega = {omega} out of range for {what} (expected {range})")]
    OmegaOutOfRange {
        omega: f64,
        what: String,
        range: String,
    },

    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Refinement or grading would exceed the configured vertex budget.
    #[error("mesh budget exceeded: {vertices} vertices > cap {cap}")]
    MeshBudgetExceeded { vertices: usize, cap: usize },

    /// An arc is shorter than the smallest representable mesh edge.
    #[error("degenerate arc: {0}")]
    DegenerateArc(String),

    /// The arc layout cannot be meshed by the constrained builder.
    #[error("unsupported arc configuration: {0}")]
    UnsupportedArcConfiguration(String),

    /// A mesh element has (numerically) zero measure.
    #[error("degenerate element {index}: measure {measure:.3e}")]
    DegenerateTriangle { index: usize, measure: f64 },

    /// Matrix/vector sizes disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The mass matrix is not positive definite.
    #[error("singular mass matrix: {0}")]
    SingularMass(String),

    /// The iterative eigensolver did not reach the residual tolerance.
    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    /// No strictly positive eigenvalue exists in the computed set.
    #[error("spectrum contains no positive eigenvalue within the computed range")]
    AllZero,

    /// Eigenvalue input to a closed form is negative.
    #[error("negative lambda: {0}")]
    NegativeLambda(f64),

    /// (alpha, lambda) do not satisfy lambda = alpha(alpha + N - 2).
    #[error("inconsistent mode pair: alpha = {alpha}, lambda = {lambda}, dim = {dim}")]
    InconsistentPair { alpha: f64, lambda: f64, dim: usize },

    /// The radial profile is not square integrable near the origin.
    #[error("non-integrable mode: 2(alpha-1)+N = {exponent} <= 0")]
    NonIntegrable { exponent: f64 },

    /// Angular coordinate outside the slit-plane branch (-pi, pi).
    #[error("theta = {0} outside (-pi, pi)")]
    ThetaOutOfRange(f64),

    /// Band half-width outside (0, R/2).
    #[error("lambda = {lambda} outside (0, {limit}) for band quadrature")]
    LambdaOutOfRange { lambda: f64, limit: f64 },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Extrapolation input is not monotone, so no order can be fitted.
    #[error("non-monotone level sequence: {0}")]
    NonMonotoneSequence(String),

    /// Polyline points do not lie in a common plane.
    #[error("non-planar input: {0}")]
    NonPlanarInput(String),

    /// Wrapped I/O failure from an export or cache operation.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Wrapped serialization failure.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
