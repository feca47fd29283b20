use thiserror::Error;

/// Every failure the workbench can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("alphabet has {0} atoms; at most {max} are supported", max = crate::ltl::MAX_ATOMS)]
    AlphabetTooLarge(usize),
    #[error("duplicate atom `{0}` in alphabet")]
    DuplicateAtom(String),
    #[error("{what} exceeds the state cap of {cap}")]
    AutomatonTooLarge { what: &'static str, cap: usize },
    #[error("formula is not finitary")]
    NotFinitary,
    #[error("formula is finitary; it has no uncommittable word")]
    FinitaryFormula,
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("unknown state or action")]
    UnknownStateOrAction,
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("probability parameter {0} is out of range")]
    InvalidP(f64),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("reward schemes need a single Rabin pair, automaton has {0}")]
    MultiplePairsUnsupported(usize),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("lower bound violated: {0}")]
    BoundViolated(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidModel(e.to_string())
    }
}
