use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Γ₀ empty: at least one Dirichlet boundary piece is required")]
    EmptyDirichlet,

    #[error("resolution {0} too small (need at least 4)")]
    ResolutionTooSmall(usize),

    #[error("unsupported dimension {0} (expected 1 or 2)")]
    Dimension(usize),

    #[error("boundary side {side} does not exist in dimension {dim}")]
    InvalidSide { side: String, dim: usize },

    #[error("element {element}: coefficient matrix not symmetric (|a12 - a21| = {asym:e})")]
    AsymmetricCoefficient { element: usize, asym: f64 },

    #[error("element {element}: coefficient not elliptic (min eigenvalue {min_eig:e})")]
    NotElliptic { element: usize, min_eig: f64 },

    #[error("restricted stiffness operator is singular")]
    SingularStiffness,

    #[error("requested {requested} shells but only {available} interior layers exist")]
    TooManyShells { requested: usize, available: usize },

    #[error("invalid shell request: {0}")]
    Shells(String),

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("spectral invariant breached: {0}")]
    SpectralInvariant(String),

    #[error("fractional exponent s = {0} must lie in (0,1)")]
    Exponent(f64),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("invalid initial data: {0}")]
    InitialData(String),

    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("time stepping aborted at t = {t} after {halvings} consecutive dt halvings (min u = {min_u:e}, max u = {max_u:e})")]
    Aborted {
        t: f64,
        halvings: usize,
        min_u: f64,
        max_u: f64,
    },

    #[error("{0}")]
    Diagnostics(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
