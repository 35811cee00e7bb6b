//! Error types, one enum per module plus a crate-wide wrapper.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarpetError {
    #[error("bases must satisfy n > m >= 2, got n = {n}, m = {m}")]
    BadBases { n: u32, m: u32 },
    #[error("grid {n} x {m} exceeds the supported size")]
    TooLarge { n: u32, m: u32 },
    #[error("digit ({i}, {j}) lies outside the {n} x {m} grid")]
    RangeError { i: u32, j: u32, n: u32, m: u32 },
    #[error("digit ({i}, {j}) is listed twice")]
    DuplicateDigit { i: u32, j: u32 },
    #[error("a carpet needs at least two digits, got {0}")]
    TooFewDigits(usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl CarpetError {
    pub fn code(&self) -> &'static str {
        match self {
            CarpetError::BadBases { .. } => "carpet.bad_bases",
            CarpetError::TooLarge { .. } => "carpet.too_large",
            CarpetError::RangeError { .. } => "carpet.range_error",
            CarpetError::DuplicateDigit { .. } => "carpet.duplicate_digit",
            CarpetError::TooFewDigits(_) => "carpet.too_few_digits",
            CarpetError::NotApplicable(_) => "carpet.not_applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("the period of a coding must be nonempty")]
    EmptyPeriod,
    #[error("digit ({i}, {j}) is not in the carpet's digit set")]
    ForeignDigit { i: u32, j: u32 },
    #[error("requested word length must be at least 1")]
    ZeroLength,
    #[error("malformed point: {0}")]
    BadPoint(String),
}

impl CodingError {
    pub fn code(&self) -> &'static str {
        match self {
            CodingError::EmptyPeriod => "coding.empty_period",
            CodingError::ForeignDigit { .. } => "coding.foreign_digit",
            CodingError::ZeroLength => "coding.zero_length",
            CodingError::BadPoint(_) => "coding.bad_point",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunLengthError {
    #[error("word ends at position {len} before the quantity at position {needed} is determined")]
    InsufficientWord { len: u64, needed: u64 },
    #[error("position {0} is out of range (positions start at {1})")]
    BadPosition(u64, u64),
}

impl RunLengthError {
    pub fn code(&self) -> &'static str {
        match self {
            RunLengthError::InsufficientWord { .. } => "runlength.insufficient_word",
            RunLengthError::BadPosition(..) => "runlength.bad_position",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("radius {0} is out of range")]
    OutOfRange(String),
    #[error("depth {depth} is below the required rank {required}")]
    DepthTooShallow { depth: u32, required: u32 },
    #[error("no admissible candidate center found at depth {0}")]
    NoAdmissibleCenter(u32),
    #[error("the digit words do not describe a square meeting the carpet")]
    EmptySquare,
    #[error("x-word has length {x} and y-word has length {y}, expected {k} and {ell}")]
    LengthMismatch { x: usize, y: usize, k: u32, ell: u64 },
    #[error("ratio rho must lie strictly between 0 and 1, got {0}")]
    BadRho(String),
}

impl MeasureError {
    pub fn code(&self) -> &'static str {
        match self {
            MeasureError::OutOfRange(_) => "measure.out_of_range",
            MeasureError::DepthTooShallow { .. } => "measure.depth_too_shallow",
            MeasureError::NoAdmissibleCenter(_) => "measure.no_admissible_center",
            MeasureError::EmptySquare => "measure.empty_square",
            MeasureError::LengthMismatch { .. } => "measure.length_mismatch",
            MeasureError::BadRho(_) => "measure.bad_rho",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("bad gauge: {0}")]
    BadGauge(String),
    #[error("t' = {0} lies outside [0, 1/sigma - 1]")]
    BadT(String),
    #[error("depth must be at least {min}, got {got}")]
    DepthTooSmall { min: u64, got: u64 },
}

impl IndexError {
    pub fn code(&self) -> &'static str {
        match self {
            IndexError::NotApplicable(_) => "index.not_applicable",
            IndexError::BadGauge(_) => "index.bad_gauge",
            IndexError::BadT(_) => "index.bad_t",
            IndexError::DepthTooSmall { .. } => "index.depth_too_small",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("carpets use different bases ({0}, {1}) and ({2}, {3})")]
    BaseMismatch(u32, u32, u32, u32),
}

impl ClassifyError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassifyError::BaseMismatch(..) => "classify.base_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Carpet(#[from] CarpetError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    RunLength(#[from] RunLengthError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

impl Error {
    /// Module-qualified machine-readable code, e.g. `carpet.bad_bases`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Carpet(e) => e.code(),
            Error::Coding(e) => e.code(),
            Error::RunLength(e) => e.code(),
            Error::Measure(e) => e.code(),
            Error::Index(e) => e.code(),
            Error::Classify(e) => e.code(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
