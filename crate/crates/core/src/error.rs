use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported lattice dimension {0}, expected 1 or 2")]
    UnsupportedDim(usize),
    #[error("invalid extents: {0}")]
    InvalidExtents(String),
    #[error("boundary flux: {0}")]
    Boundary(String),
    #[error("register size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("register of {n} qubits exceeds the limit of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("unknown fermionic mode (site {site}, component {component})")]
    UnknownMode { site: usize, component: usize },
    #[error("unknown site {0}")]
    UnknownSite(usize),
    #[error("unknown link {0}")]
    UnknownLink(usize),
    #[error("invalid spin {0}, expected a positive half-integer")]
    InvalidSpin(f64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("operator is not Hermitian (largest imaginary coefficient {0:e})")]
    NotHermitian(f64),
    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { got: usize, expected: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),
    #[error("layout was built for a different lattice")]
    LayoutMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
