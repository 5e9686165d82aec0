use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix singular to tolerance (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid problem: {0}")]
    Validation(String),
    #[error("z = {z} is not admissible: Re(z*b) vanishes for block {block}")]
    Admissibility { z: C64, block: usize },
    #[error("maximality condition rank(C D) = n fails")]
    Maximality,
    #[error("not applicable: {0}")]
    Applicability(String),
    #[error("boundary conditions are not separated: {0}")]
    Structure(String),
    #[error("step size underflow while integrating at lambda = {lambda}")]
    Stiffness { lambda: C64 },
    #[error("root search budget exceeded: {0}")]
    SearchBudget(String),
    #[error("characteristic determinant vanishes identically")]
    Degenerate,
    #[error("chain construction failed: {0}")]
    Construction(String),
    #[error("eigenvalue pairing failed: {0}")]
    Pairing(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Broad class used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension(_)
            | Error::Domain(_)
            | Error::Validation(_)
            | Error::Maximality
            | Error::Json(_)
            | Error::Io(_) => ErrorKind::Validation,
            Error::Applicability(_) | Error::Structure(_) | Error::Admissibility { .. } => {
                ErrorKind::Applicability
            }
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Applicability,
}

pub type Result<T> = std::result::Result<T, Error>;
