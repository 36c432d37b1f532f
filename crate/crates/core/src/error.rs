//! Crate-wide error type.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An operation received an empty input it cannot act on.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A parameter violated its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Two paired slices disagree on length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Labels contain a single class where at least two are required.
    #[error("labels contain a single class; {0} requires at least two")]
    SingleClass(&'static str),

    /// A class has too few members for the requested operation.
    #[error("class {class} has {count} members, needs at least {required}")]
    ClassTooSmall {
        class: usize,
        count: usize,
        required: usize,
    },

    /// The minority class is too small for the configured neighbour count.
    #[error("minority class has {minority} members but k_neighbors={k}; use a smaller k")]
    MinorityTooSmall { minority: usize, k: usize },

    /// A feature manifest does not match the one a model was trained with.
    #[error("feature manifest mismatch: expected [{expected}], got [{got}]")]
    ManifestMismatch { expected: String, got: String },
}
