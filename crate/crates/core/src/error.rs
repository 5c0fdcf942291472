use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are coarse on purpose: callers (the CLI in particular) map
/// them to exit codes, and the message carries the detail.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: unknown letters, bad shapes, unparsable files.
    #[error("input error: {0}")]
    Input(String),

    /// Two values built over different alphabets or systems were combined.
    #[error("alphabet mismatch: {0}")]
    Mismatch(String),

    /// An operation was applied outside its domain (e.g. last letter of `e`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition does not hold for the given input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An iterative numeric procedure did not produce an acceptable answer.
    #[error("numeric failure after {iterations} iterations: {detail}")]
    Numeric { iterations: usize, detail: String },

    /// Normalization is impossible because the Perron-Frobenius eigenvalue vanishes.
    #[error("degenerate system: {0}")]
    Degenerate(String),

    /// A multiplicative function would exceed the configured sphere storage.
    #[error("depth {depth} needs {needed} sphere entries, cap is {cap}")]
    DepthOverflow {
        depth: usize,
        needed: usize,
        cap: usize,
    },

    /// The words handed to a folding do not generate a finite-index subgroup.
    #[error("subgroup has infinite index: {0}")]
    InfiniteIndex(String),

    /// A self-check on a constructed object failed. This signals a bug or an
    /// input that violated a precondition the library could not detect earlier.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn internal(msg: impl Into<String>) -> Error {
    Error::Internal(msg.into())
}
