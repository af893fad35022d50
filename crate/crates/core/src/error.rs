use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigendecomposition did not converge (residual {residual:e})")]
    EigenNonConvergence { residual: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eig:e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("non-positive diagonal entry {value:e} at index {index}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("random draw stayed degenerate after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("kernel fails the admissibility constraint `{constraint}` ({value:e})")]
    NotAdmissible { constraint: String, value: f64 },

    #[error(
        "undecided: best primal residual {primal_residual:e}, best dual violation {dual_violation:e}"
    )]
    Undecided {
        primal_residual: f64,
        dual_violation: f64,
    },

    #[error("could not bracket the extremal norm (last upper probe {upper:e})")]
    BracketFailure { upper: f64 },

    #[error("gram mismatch at ({i}, {j}): {gap:e}")]
    GramMismatch { i: usize, j: usize, gap: f64 },

    #[error("block {index}: {source}")]
    Block {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("resolvent is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
