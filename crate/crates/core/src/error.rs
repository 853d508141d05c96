use thiserror::Error;

/// Errors produced by the codec.
///
/// Every message starts with the variant name so that command-line users and
/// scripts can match on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("MalformedHeader: {0}")]
    MalformedHeader(String),
    #[error("UnsupportedMaxval: {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("TruncatedData: expected {expected} bytes of {what}, found {found}")]
    TruncatedData {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("InvalidSample: {0} exceeds maxval 255")]
    InvalidSample(u32),

    #[error("NotSquare: image is {width}x{height}")]
    NotSquare { width: usize, height: usize },
    #[error("NotPowerOfTwo: side {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("IndivisibleByRange: side {side} is not a multiple of range size {n}")]
    IndivisibleByRange { side: usize, n: usize },
    #[error("TooSmallForDomain: side {side} cannot hold a {domain}x{domain} domain block")]
    TooSmallForDomain { side: usize, domain: usize },

    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("OddSide: cannot contract a block of side {0}")]
    OddSide(usize),
    #[error("SideMismatch: blocks of side {left} and {right}")]
    SideMismatch { left: usize, right: usize },
    #[error("NoValidPositions: side {width} is smaller than the domain size {domain}")]
    NoValidPositions { width: usize, domain: usize },
    #[error("OutOfBounds: {0}")]
    OutOfBounds(String),
    #[error("OutOfRange: {value} outside [-{limit}, {limit}]")]
    OutOfRange { value: f64, limit: f64 },

    #[error("BadMagic: expected \"FIC1\"")]
    BadMagic,
    #[error("InvalidMapping: {0}")]
    InvalidMapping(String),
    #[error("TrailingData: {0} unexpected bytes after the last record")]
    TrailingData(usize),
    #[error("EmptyImage: size accounting needs a non-empty raw image")]
    EmptyImage,

    #[error("ScaleMismatch: raster side {found}, expected {expected}")]
    ScaleMismatch { expected: usize, found: usize },
    #[error("DimensionMismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },
    #[error("NonContractive: scale bound {0} is not below 1")]
    NonContractive(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
