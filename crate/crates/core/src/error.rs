use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of range for dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("empty submatrix: cannot delete a row and column from a 1x1 matrix")]
    EmptySubmatrix,

    #[error("overlap not SPD")]
    NotPositiveDefinite,

    #[error("{operation} did not converge after {iterations} iterations")]
    NotConverged {
        operation: &'static str,
        iterations: usize,
    },

    #[error("evaluation at spectrum: z lies on the eigenvalue {eigenvalue}")]
    AtSpectrum { eigenvalue: f64 },

    #[error("singular matrix in {operation}")]
    Singular { operation: &'static str },

    #[error(
        "invalid eigenvalue-product configuration: overlap minor ({n}, {m}) is singular; use green_cofactor"
    )]
    SingularOverlapMinor { n: usize, m: usize },

    #[error("degenerate spectrum; use green_spectral (eigenvalue gap {gap:e} below threshold {threshold:e})")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("hypergeometric series did not converge after {terms} terms (partial sum {partial_re} + {partial_im}i, last correction {last_change:e})")]
    SeriesNotConverged {
        terms: usize,
        partial_re: f64,
        partial_im: f64,
        last_change: f64,
    },

    #[error("recursion breakdown at n = {n}")]
    RecursionBreakdown { n: usize },

    #[error("quadrature did not converge: achieved residual {residual:e} exceeds {tolerance:e}")]
    Quadrature { residual: f64, tolerance: f64 },

    #[error("rational fit residual {residual:e} exceeds threshold {threshold:e}")]
    FitResidual { residual: f64, threshold: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
