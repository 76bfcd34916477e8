use thiserror::Error;

/// Errors raised by the bound, threshold and density-evolution routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid parallel-channel assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid puncturing pattern: {0}")]
    InvalidPattern(String),
    #[error("puncturing pattern names degree {degree}, which carries no variable-node edges")]
    PatternMismatch { degree: u32 },
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("operation requires a {expected}-perspective distribution")]
    Perspective { expected: &'static str },
    #[error("channel {index} of the assignment is not a BEC")]
    NonBecChannel { index: usize },
    #[error("degenerate denominator in rate bound ({0}); the bound is vacuous for this input")]
    DegenerateDenominator(String),
    #[error("channel {index} has zero capacity")]
    ZeroCapacity { index: usize },
    #[error("sum of q_j g_j,1 = {0} makes the logarithm singular")]
    DegenerateLog(f64),
    #[error("threshold bracket failure: {0}")]
    BracketFailure(String),
    #[error("monotonicity check failed: {0}")]
    NonMonotone(String),
    #[error("quantization grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid density-evolution configuration: {0}")]
    InvalidConfig(String),
    #[error("ordering violated: {0}")]
    Ordering(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical procedure on otherwise well-formed input
    /// (degenerate bounds, failed brackets), as opposed to invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator(_)
                | Error::ZeroCapacity { .. }
                | Error::DegenerateLog(_)
                | Error::BracketFailure(_)
                | Error::NonMonotone(_)
                | Error::Ordering(_)
        )
    }

    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
