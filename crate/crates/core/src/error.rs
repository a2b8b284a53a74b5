use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transition row (x1={x1}, x2={x2}) sums to {sum}, not 1")]
    NonStochastic { x1: usize, x2: usize, sum: f64 },

    #[error("negative probability {value} at flat index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("alphabet `{0}` is empty")]
    EmptyAlphabet(&'static str),

    #[error("{context}: expected {expected} entries, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{context}: index {index} out of range (size {size})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        size: usize,
    },

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("axis `{0}` appears in more than one argument group")]
    OverlappingAxes(String),

    #[error("pmf sums to {0}, not 1")]
    NotNormalized(f64),

    #[error("no axes selected")]
    EmptyAxes,

    #[error("no positive secrecy rate: {0}")]
    NoPositiveSecrecyRate(String),

    #[error("state space of {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("{context}: size {size} overflows the supported range")]
    SizeOverflow { context: &'static str, size: u128 },

    #[error("message width {msg} does not match codebook width {book}")]
    WidthMismatch { msg: u32, book: u32 },

    #[error("key has {key} bits but {needed} are required")]
    KeyTooShort { key: u32, needed: u32 },

    #[error("slot {0} not covered by this schedule")]
    InvalidSlot(usize),

    #[error("weights invalid: {0}")]
    WeightMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
