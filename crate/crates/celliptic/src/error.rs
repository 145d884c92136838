//! Crate error type and process exit-code mapping.

use std::fmt;

/// All failures surfaced by library operations.
#[derive(Debug)]
pub enum Error {
    /// A vector or matrix argument has the wrong length/shape.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// Operator data violates a structural invariant.
    InvalidOperator(String),
    /// Region data violates a structural invariant.
    InvalidRegion(String),
    /// A numeric parameter is out of its admissible range.
    InvalidParameter(String),
    /// The lattice is too coarse for the requested stencil or ball.
    GridTooSmall(String),
    /// A requested region is not contained in the sampled box.
    RegionOutsideGrid(String),
    /// Gram matrix of the projection basis is numerically singular.
    GramSingular,
    /// Resolution ladder grids are not nested refinements of one box.
    LadderMismatch(String),
    /// Operation requires a nonzero polynomial.
    ZeroPolynomial,
    /// Polynomial does not vanish at the required point.
    PointNotVanishing {
        value: f64,
    },
    /// Operation requires a specific relation between order k and dimension n.
    OrderMismatch {
        need: &'static str,
        k: usize,
        n: usize,
    },
    Io(std::io::Error),
    Json(serde_json::Error),
    /// Malformed binary grid file or sidecar.
    FileFormat(String),
}

impl Error {
    /// Process exit code: 1 parse error, 2 input invariant violation,
    /// 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::FileFormat(_) | Error::InvalidParameter(_) => 1,
            Error::DimensionMismatch { .. }
            | Error::InvalidOperator(_)
            | Error::InvalidRegion(_)
            | Error::LadderMismatch(_)
            | Error::ZeroPolynomial
            | Error::PointNotVanishing { .. }
            | Error::OrderMismatch { .. }
            | Error::RegionOutsideGrid(_) => 2,
            Error::GramSingular | Error::GridTooSmall(_) => 3,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => {
                write!(f, "{what}: expected dimension {expected}, got {got}")
            }
            Error::InvalidOperator(msg) => write!(f, "invalid operator: {msg}"),
            Error::InvalidRegion(msg) => write!(f, "invalid region: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::GridTooSmall(msg) => write!(f, "grid too small: {msg}"),
            Error::RegionOutsideGrid(msg) => write!(f, "region outside grid: {msg}"),
            Error::GramSingular => write!(f, "Gram matrix is numerically singular"),
            Error::LadderMismatch(msg) => write!(f, "resolution ladder mismatch: {msg}"),
            Error::ZeroPolynomial => write!(f, "operation requires a nonzero polynomial"),
            Error::PointNotVanishing { value } => {
                write!(
                    f,
                    "polynomial does not vanish at the center (|q(x0)| = {value:e})"
                )
            }
            Error::OrderMismatch { need, k, n } => {
                write!(
                    f,
                    "operation requires {need} (operator has k = {k}, n = {n})"
                )
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
            Error::FileFormat(msg) => write!(f, "file format error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
