use thiserror::Error;

/// Failure modes of the integration and measure routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval: lo={lo}, hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid tagged partition: {0}")]
    InvalidPartition(String),
    #[error("refinement budget of {cap} cells exceeded")]
    RefinementBudgetExceeded { cap: usize },
    #[error("non-finite Riemann sum term at tag {tag}")]
    NonFiniteSum { tag: f64 },
    #[error("integration did not converge after {levels} levels (last discrepancy {discrepancy:e})")]
    NoConvergence { levels: usize, discrepancy: f64 },
    #[error("tail of the unbounded integral is not controlled beyond {b_inf}")]
    TailNotControlled { b_inf: f64 },
    #[error("could not resolve sign changes of the density: {0}")]
    SignChangeResolutionFailure(String),
    #[error("integrand must declare a value at +inf equal to zero to integrate over an unbounded set")]
    MissingValueAtInfinity,
    #[error("function is not (HKL) integrable: assembly residual {residual:e}")]
    NotHklIntegrable { residual: f64 },
    #[error(
        "variation mode is degenerate on an antipodally closed grid: |(-x*)mu| = |x* mu| while x*(x_A) is odd; use a hemisphere grid"
    )]
    AntipodalDegeneracy,
    #[error("support values are not sublinear (worst violation {violation:e}); no convex integral exists")]
    NotConvexlyIntegrable { violation: f64 },
    #[error("support sets live on different direction grids")]
    GridMismatch,
    #[error("scale factor must be nonnegative, got {0}")]
    NegativeScalar(f64),
    #[error("invalid direction grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("generator violates its precondition: {0}")]
    GeneratorViolatesDomination(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
