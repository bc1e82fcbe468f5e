use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::jet::SingularMatrix;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("singular {what}: {source}")]
    Singular {
        what: &'static str,
        source: SingularMatrix,
    },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("frame is not on the orthonormal frame bundle (residual {residual:e})")]
    NotOnBundle { residual: f64 },
    #[error("Gram-Schmidt failed: {0}")]
    GramSchmidt(String),
    #[error("flow left the chart domain at {0:?}")]
    FlowExit(Vec<f64>),
    #[error("not a Finsler length function: {0}")]
    Homogeneity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("at point {point:?}: {source}")]
    AtPoint { point: Vec<f64>, source: Box<Error> },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("expression error at {path}: {source}")]
    Expression { path: String, source: ParseError },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("no catalog entry or readable file named {0:?}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn at_point(self, point: &[f64]) -> Error {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint {
                point: point.to_vec(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
