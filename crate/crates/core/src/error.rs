use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator index {index} out of range for {strands} strands")]
    LetterOutOfRange { index: usize, strands: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("braid word is not pure (permutation {0:?})")]
    NotPure(Vec<usize>),

    #[error("operation needs a 3-strand braid, got {0} strands")]
    NotThreeStrands(usize),

    #[error("integer overflow while multiplying matrices")]
    Overflow,

    #[error("ping-pong descent stalled: {0}")]
    DescentFailed(String),

    #[error("pattern `{pattern}` does not vanish on the twist subgroup (symmetrized value {value})")]
    InadmissiblePattern { pattern: String, value: i64 },

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("point ({0}, {1}) is outside the open unit disc")]
    OutsideDisc(f64, f64),

    #[error("trajectory left the unit disc (|x| = {0})")]
    Escaped(f64),

    #[error("quadrature did not converge within {0} refinements")]
    Quadrature(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("too many degenerate samples: {degenerate} of {attempts} draws")]
    DegenerateSampling { degenerate: usize, attempts: usize },

    #[error("rank deficient: achievable rank {achievable} of {requested}")]
    RankDeficient { achievable: usize, requested: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
