use thiserror::Error;

/// Errors raised by state manipulation, pulse primitives and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A transfer into a level that already holds an atom in some branch.
    #[error("blockade violation: level {level} already occupied in configuration {configuration}")]
    BlockadeViolation { level: u8, configuration: String },
    #[error("unsupported configuration {configuration}: levels {first} and {second} both occupied")]
    UnsupportedConfiguration {
        first: u8,
        second: u8,
        configuration: String,
    },
    #[error("ambiguous emission: levels {first} and {second} both occupied in configuration {configuration}")]
    AmbiguousEmission {
        first: u8,
        second: u8,
        configuration: String,
    },
    #[error("emission merges distinct configurations into {configuration}: two mapped levels share a letter")]
    IndistinguishableEmission { configuration: String },
    #[error("postselected outcome {outcome} on mode {mode} has probability {probability:e}")]
    ImpossiblePostselection {
        mode: usize,
        outcome: char,
        probability: f64,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("mode {mode} is not polarization encoded (vacuum in support)")]
    NotPolarizationEncoded { mode: usize },
    #[error("no local Clifford correction makes every stabilizer +1")]
    NoCorrection,
    /// A pulse failure during schedule execution, tagged with the 0-based instruction index.
    #[error("instruction {index}: {source}")]
    Schedule {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
