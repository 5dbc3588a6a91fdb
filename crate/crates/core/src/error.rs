use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("precision of {have} bits is below the required {need} bits")]
    InsufficientPrecision { have: usize, need: usize },

    #[error(
        "quadrature did not reach the tolerance after {levels} levels \
         (error estimate {estimate:e}, {nodes_used} nodes)"
    )]
    QuadratureTolerance {
        levels: usize,
        estimate: f64,
        nodes_used: usize,
    },

    #[error("limit estimate did not converge: {0}")]
    NonConvergence(String),

    #[error("no sign change of the dominant coefficient brackets a root among the sampled parameters")]
    NoBracket,

    #[error("truncated approximant is not positive at n = {0}")]
    NonPositiveApproximant(u64),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid weight family: {0}")]
    InvalidFamily(String),

    #[error("unknown route `{0}`")]
    UnknownRoute(String),

    #[error("cannot parse `{0}`")]
    Parse(String),
}
