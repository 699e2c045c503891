use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the kernel. All of them describe invalid input; the
/// kernel itself performs no IO.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands disagree on a dimension.
    Shape { expected: usize, found: usize },
    EmptyQuery,
    EmptySegment,
    EmptyContext,
    /// A comparison set contains the index being scored.
    SelfComparison { index: usize },
    IndexOutOfRange { index: usize, len: usize },
    /// NaN or infinity where a finite value is required.
    NonFinite { what: &'static str },
    InfeasibleBudget { budget: usize, required: usize },
    InvalidConfig(&'static str),
    /// Malformed `.cemb` header.
    Format(&'static str),
    /// `.cemb` payload does not match the header's row and column counts.
    Truncated { expected: usize, found: usize },
    DegenerateLabels,
    LengthMismatch { scores: usize, labels: usize },
    OutOfRange { what: &'static str },
    /// The feature correlation submatrix is singular or badly conditioned.
    DegenerateSet,
    /// The requested correlation profile is too far from any valid matrix.
    InfeasibleSpec { max_adjustment: f64 },
    EnumerationBound { n: usize, max: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyQuery => f.write_str("query has no rows"),
            Error::EmptySegment => f.write_str("segment has no rows"),
            Error::EmptyContext => f.write_str("context has no rows"),
            Error::SelfComparison { index } => {
                write!(f, "comparison set of token {index} contains the token itself")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::InfeasibleBudget { budget, required } => write!(
                f,
                "budget {budget} is below the minimum of {required} tokens"
            ),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Format(msg) => write!(f, "bad embedding file: {msg}"),
            Error::Truncated { expected, found } => write!(
                f,
                "payload length mismatch: expected {expected} bytes, found {found}"
            ),
            Error::DegenerateLabels => {
                f.write_str("labels need at least one positive and one negative")
            }
            Error::LengthMismatch { scores, labels } => {
                write!(f, "{scores} scores but {labels} labels")
            }
            Error::OutOfRange { what } => write!(f, "{what} out of range"),
            Error::DegenerateSet => f.write_str("feature set has a singular correlation matrix"),
            Error::InfeasibleSpec { max_adjustment } => write!(
                f,
                "correlation profile infeasible: PSD projection moves an entry by {max_adjustment:.4}"
            ),
            Error::EnumerationBound { n, max } => {
                write!(f, "{n} features exceed the enumeration bound of {max}")
            }
        }
    }
}

impl core::error::Error for Error {}
