use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty digit set")]
    EmptyDigitSet,
    #[error("length of entry {0} is not positive")]
    NonPositiveLength(usize),
    #[error("lengths sum to {0}, expected exactly 1")]
    LengthSum(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("digit {digit} is not in the digit set of symbol {symbol}")]
    DigitOutOfRange { symbol: String, digit: u64 },
    #[error("point {0} is outside [0,1]")]
    PointOutOfRange(String),
    #[error("omega prefix has length {have}, need {need}")]
    OmegaTooShort { have: usize, need: usize },
    #[error("digit stream ended after {0} digits")]
    StreamEnded(usize),
    #[error("digit stream for symbol {0} exhausted")]
    StreamExhausted(String),
    #[error("invalid frequency vector: {0}")]
    InvalidFrequency(String),
    #[error("tail sum of symbol {symbol} diverges at exponent t = {t}")]
    DivergentTail { symbol: String, t: f64 },
    #[error("enumeration guard exceeded: {candidates:.3e} candidates, cap {cap}")]
    EnumerationCap { candidates: f64, cap: u64 },
    #[error("prefix of length {0} has zero mass")]
    ZeroMass(usize),
    #[error("horizon too short: {0}")]
    Horizon(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("cannot parse {0}")]
    Parse(String),
    #[error("point has no expansion at depth {0}")]
    NoExpansion(usize),
}

impl Error {
    /// Numeric guards (divergence, enumeration cap, zero mass) as opposed to bad input.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(self, Error::DivergentTail { .. } | Error::EnumerationCap { .. } | Error::ZeroMass(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
