use std::path::PathBuf;

use crate::point_process::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid intensity: {0}")]
    InvalidIntensity(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("non-finite integrand value {value} at tuple {tuple:?}")]
    NonFiniteIntegrand { value: f64, tuple: Vec<Point> },

    #[error("partition enumeration over {total} variables exceeds the limit of {limit}")]
    Capacity { total: usize, limit: usize },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("simple functions live on incompatible grids")]
    IncompatibleGrids,

    #[error("simple function: {0}")]
    InvalidSimpleFunction(String),

    #[error("invalid chaos index pair (i, j) = ({i}, {j}) for order {k}")]
    InvalidOrder { i: usize, j: usize, k: usize },

    #[error("degenerate functional: variance {variance} (se {se}) is not positive")]
    DegenerateFunctional { variance: f64, se: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("kernel `{0}` has no locality radius")]
    NotLocal(String),

    #[error("degenerate variance at lambda = {lambda}: {variance} (se {se})")]
    DegenerateVariance { lambda: f64, variance: f64, se: f64 },

    #[error("rate fit needs at least 3 intensities, got {0}")]
    FitRefused(usize),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
