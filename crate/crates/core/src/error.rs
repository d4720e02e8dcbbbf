use thiserror::Error;

/// Errors raised by model evaluation, path operations, the solver and the CLI layer.
#[derive(Debug, Error)]
pub enum FermatError {
    #[error("model evaluation produced a non-finite value at y={y:?}, t={t}, nu={nu:?}, tau={tau}")]
    NonFinite {
        y: Vec<f64>,
        t: f64,
        nu: Vec<f64>,
        tau: f64,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("segment index {index} out of range 1..={segments}")]
    IndexOutOfRange { index: usize, segments: usize },

    #[error("path is not on the constant-charge manifold (charge deviation {deviation:e}, tolerance {tolerance:e})")]
    NotInConstraint { deviation: f64, tolerance: f64 },

    #[error("energy level kappa={kappa} is not admissible: {reason}")]
    Inadmissible { kappa: f64, reason: String },

    #[error("degenerate endpoints: p and q lie on the same flow line")]
    DegenerateEndpoints,

    #[error("no seed converged ({attempts} attempted)")]
    NoConvergence { attempts: usize },

    #[error("parse error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Parse {
        location: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FermatError {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            FermatError::Parse { .. } | FermatError::Argument(_) => 2,
            FermatError::Inadmissible { .. } | FermatError::DegenerateEndpoints => 3,
            FermatError::NoConvergence { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = FermatError> = std::result::Result<T, E>;
