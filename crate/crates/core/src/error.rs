use crate::eigen::EigenvalueReport;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent user input (specs, configs, JSON).
    #[error("invalid input: {0}")]
    Input(String),

    /// Exponent outside the validity range of the requested bound.
    #[error("invalid exponent p = {p} for {theorem}: requires p >= {min_p}")]
    InvalidP {
        theorem: String,
        p: f64,
        min_p: f64,
    },

    /// Matrix too large for the dense eigensolver.
    #[error("dimension {dim} exceeds dense solver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// The QL iteration did not converge (essentially unreachable for
    /// symmetric input; kept as a hard error rather than a panic).
    #[error("eigenvalue iteration failed to converge")]
    IterationFailure,

    /// Window growth hit the plan's cap with eigenvalues still moving.
    /// Carries the last (non-converged) report so callers can still emit
    /// an inconclusive verdict.
    #[error("no convergence: window reached {max_size} sites with increments above tolerance")]
    NoConvergence {
        max_size: usize,
        report: Box<EigenvalueReport>,
    },

    /// Operation requires at least one eigenvalue outside the band.
    #[error("no eigenvalues outside the essential band")]
    NoEigenvalues,

    /// Requested an entry past the end of a finite list.
    #[error("index {index} beyond available entries ({available})")]
    IndexRange { index: usize, available: usize },

    /// A lattice bond touches a site outside the declared box.
    #[error("bond {0} references a site outside the box")]
    BondOutsideBox(String),
}

pub type Result<T> = std::result::Result<T, Error>;
