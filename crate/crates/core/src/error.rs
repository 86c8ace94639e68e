use alloc::string::String;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    Argument(String),
    /// The input is well-formed but carries no information to work with
    /// (all leaves identical, every statistic zero, ...).
    Degenerate(String),
    /// An oracle or exact enumeration refused an input above its size cap.
    TooLarge { what: &'static str, size: usize, cap: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::TooLarge { what, size, cap } => {
                write!(f, "{what} has size {size}, above the cap of {cap}")
            }
        }
    }
}

impl core::error::Error for Error {}
