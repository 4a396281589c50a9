use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("moment sequence is not solvable: minimum Hankel eigenvalue {min_eigenvalue:e} below -{threshold:e}")]
    NotSolvable { min_eigenvalue: f64, threshold: f64 },

    #[error("degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("truncated sequence not shift-consistent (kernel residual {residual:e})")]
    ShiftInconsistent { residual: f64 },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("invalid Schur parameter: {0}")]
    Parameter(String),

    #[error("point z = {z} outside the admissible domain: {reason}")]
    Domain { z: Complex64, reason: &'static str },

    #[error("{what} is ill-conditioned (condition number {cond:e})")]
    Conditioning { what: &'static str, cond: f64 },

    #[error("indeterminate at this truncation: defect numbers ({0}, {1}); evaluate and invert instead")]
    Indeterminate(usize, usize),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Conditioning { .. } | Error::Consistency(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }

    /// Short machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::NotSolvable { .. } => "not_solvable",
            Error::DegreeOutOfRange { .. } => "degree_out_of_range",
            Error::ShiftInconsistent { .. } => "shift_inconsistent",
            Error::Consistency(_) => "consistency",
            Error::Parameter(_) => "parameter",
            Error::Domain { .. } => "domain",
            Error::Conditioning { .. } => "conditioning",
            Error::Indeterminate(..) => "indeterminate",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}
