use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("edge probability {prob} exceeds 1 ({which})")]
    InvalidProbability { which: &'static str, prob: f64 },

    #[error("budget infeasible: requested {requested} {what}, at most {max} available")]
    BudgetInfeasible {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown adversary strategy `{0}`")]
    UnknownStrategy(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("KL divergence is infinite: q has mass where p has none")]
    InfiniteDivergence,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("stage `{stage}` failed for seed {seed}: {source}")]
    Stage {
        stage: &'static str,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str, seed: u64) -> Self {
        Error::Stage {
            stage,
            seed,
            source: Box::new(self),
        }
    }
}
