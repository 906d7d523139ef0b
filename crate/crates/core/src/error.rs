use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("distribution must have at least one component or atom")]
    EmptyDistribution,
    #[error("distribution is not normalized")]
    NotNormalized,
    #[error("invalid gaussian component: {0}")]
    InvalidComponent(String),
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("grid step {step} gives only {cells:.2} cells across the narrowest window (need at least {required})")]
    GridTooCoarse { step: f64, cells: f64, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("operation requires {0}")]
    Unsupported(String),
    #[error("singular indifference system for supports {rows:?} / {cols:?}")]
    DegenerateSupport { rows: Vec<usize>, cols: Vec<usize> },
    #[error("tuple expansion needs {terms} terms, above the cap of {cap}")]
    TupleExplosion { terms: u128, cap: u128 },
    #[error("no root of the indifference condition lies in [0, 1] for player {}", player + 1)]
    NoInteriorRoot { player: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("payoff table does not cover: {}", .0.join("; "))]
    MissingProfile(Vec<String>),
    #[error("parameter `{0}` has no binding")]
    UnboundParameter(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized
                | Error::GridTooCoarse { .. }
                | Error::DegenerateSupport { .. }
                | Error::TupleExplosion { .. }
                | Error::NoInteriorRoot { .. }
                | Error::ZeroMass
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
