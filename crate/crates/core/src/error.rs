use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature failed at tau={tau}: error {abs_error:e} exceeds tolerance after {evaluations} evaluations")]
    QuadratureFailure {
        tau: f64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("degenerate target: theta={0} is an equal superposition (theta = +-pi/2)")]
    DegenerateTarget(f64),

    #[error("degenerate path: initial and target coincide")]
    DegeneratePath,

    #[error("integration unstable after {retries} step halvings: {reason}")]
    StepInstability { retries: u32, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
