use thiserror::Error;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: u32, residual: f64 },

    /// The constrained ensemble is empty.
    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),

    /// The requested computation exceeds a documented resource cap.
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    /// The Gaussian density is degenerate because |lambda| >= 1.
    #[error("degenerate correlation: lambda = {0} has |lambda| >= 1")]
    DegenerateCorrelation(f64),

    /// Two curves are defined on different intervals.
    #[error("curve intervals differ: [{0}, {1}] vs [{2}, {3}]")]
    IntervalMismatch(f64, f64, f64, f64),

    /// A finite-difference stencil needs more grid points.
    #[error("grid too coarse: {got} points, need at least {need}")]
    GridTooCoarse { got: usize, need: usize },

    /// A curve constructor received an invalid grid or value table.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// An underlying writer or reader failed.
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
