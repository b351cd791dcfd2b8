use thiserror::Error;

/// Everything that can go wrong in the laboratory.
#[derive(Debug, Error)]
pub enum HomError {
    #[error("resolution {resolution} cannot represent wavenumber {max_wavenumber} without aliasing (need at least {required})")]
    Alias {
        resolution: usize,
        max_wavenumber: i64,
        required: usize,
    },
    #[error("sin term with zero wavevector is identically zero")]
    Canonical,
    #[error("positivity violated: {0}")]
    Positivity(String),
    #[error("Krylov iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("right-hand side violates the solvability condition (defect {defect:.3e})")]
    Compatibility { defect: f64 },
    #[error("coefficient field is not uniformly elliptic (minimum eigenvalue {lambda_min:.3e})")]
    Ellipticity { lambda_min: f64 },
    #[error("degenerate construction: {0}")]
    Degenerate(String),
    #[error("trace constant {constant} must exceed sup(b1 + b2) = {sup}")]
    Trace { constant: f64, sup: f64 },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("outside the operation's domain: {0}")]
    Domain(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HomError> = std::result::Result<T, E>;
