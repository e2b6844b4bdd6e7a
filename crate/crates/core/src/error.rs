use thiserror::Error;

/// Errors raised by belief construction, extremum combining and tree updates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { got: usize, min: usize },
    #[error("grid beliefs are defined on different grids")]
    GridMismatch,
    #[error("cannot combine an empty set of beliefs")]
    EmptyChildren,
    #[error("correlation {0} outside [-1, 1]")]
    InvalidCorrelation(f64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("node {0} is not a leaf")]
    NotALeaf(usize),
    #[error("node {0} is a leaf")]
    IsLeaf(usize),
    #[error("malformed trial path: {0}")]
    MalformedPath(&'static str),
    #[error("invalid tree specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
