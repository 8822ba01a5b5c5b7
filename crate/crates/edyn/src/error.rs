use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ideal-point index {index} for {space}")]
    InvalidIndex { index: String, space: String },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("invalid prefix code: {0}")]
    InvalidPrefixCode(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("missing coordinates: {}", format_missing(.0))]
    MissingCoordinates(Vec<(usize, String)>),
    #[error("needs more fuel: {0}")]
    NeedsMoreFuel(String),
    #[error("empty space has no encoding")]
    EmptySpace,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("spec error at {path}: {msg}")]
    Spec { path: String, msg: String },
}

fn format_missing(v: &[(usize, String)]) -> String {
    v.iter()
        .map(|(i, w)| format!("({i}, {:?})", w))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn spec(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Spec { path: path.into(), msg: msg.into() }
    }
}
