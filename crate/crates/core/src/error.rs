use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid time partition: {0}")]
    InvalidTime(String),
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("problem data out of bounds: {0}")]
    BoundsViolated(String),
    #[error("non-finite value at node {node} (t = {time})")]
    NonFinite { node: usize, time: f64 },
    #[error("problem `{0}` has no analytic solution")]
    NoAnalytic(String),
    #[error("problem `{0}` has an analytic solution; use it instead of a ground truth")]
    HasAnalytic(String),
    #[error("grids are not nested: {0}")]
    NotNested(String),
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("malformed field data: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
