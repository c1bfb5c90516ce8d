use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("symbol {symbol:#04x} at offset {offset} is not in the alphabet")]
    UnknownSymbol { symbol: u8, offset: usize },

    #[error("encoding overflow: value {value} does not fit in {width} bits")]
    EncodingOverflow { value: u64, width: u32 },

    #[error("parse error at bit offset {offset}: {reason}")]
    Parse { offset: u64, reason: String },

    #[error("corrupt file: block {block}: {reason}")]
    Corrupt { block: usize, reason: String },

    #[error("corrupt padding: {0}")]
    CorruptPadding(String),

    #[error("budget exceeded: {required} compressor calls required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
