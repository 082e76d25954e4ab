use thiserror::Error;

/// Errors raised by the exact engines and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("first {max_bits} unconsumed bits are all zero")]
    ZeroPrefix { max_bits: usize },

    #[error("point still straddles a cell boundary after {max_bits} bits")]
    Unresolved { max_bits: usize },

    #[error("digit at index {index} failed to resolve: {source}")]
    AtIndex {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("digit does not fit in 64 bits")]
    DigitOverflow,

    #[error("resolution limit: {requested} pieces exceeds cap {cap}")]
    PieceCap { requested: u64, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ledger capacity {capacity} too small for trimming b = {requested}")]
    Capacity { requested: usize, capacity: usize },

    #[error("threshold {0} was not registered before streaming")]
    UnknownThreshold(u64),

    #[error("lag {lag} violates stride {stride} with offset {offset}")]
    Stride { lag: u64, stride: u64, offset: u64 },

    #[error("event not measurable at resolution m = {m} with level cap {level_cap}")]
    NotCellMeasurable { m: u32, level_cap: u32 },

    #[error("combinatorial cap exceeded: {atoms} atoms on the smaller side (cap {cap})")]
    Combinatorial { atoms: usize, cap: usize },

    #[error("digit cap {cap} exceeded by {value}")]
    DigitCap { value: u64, cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_index(self, index: u64) -> Error {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
