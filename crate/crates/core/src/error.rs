use core::fmt;

/// Errors reported by the accounting routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    Domain { what: &'static str, value: f64 },
    /// A parameter violates a type invariant.
    InvalidParameter { name: &'static str, value: f64 },
    /// A root finder was handed an interval without a sign change.
    NoBracket { lo: f64, hi: f64 },
    /// A curve handed to the conjugation is not concave.
    NotConcave { at: f64 },
    /// The requested `δ` is not reached for any `ε` up to `limit`.
    OutOfRange { target: f64, limit: f64 },
    /// Composition of mechanisms with differing parameters was requested.
    Heterogeneous,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of domain"),
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::NoBracket { lo, hi } => {
                write!(f, "no sign change on the interval [{lo}, {hi}]")
            }
            Error::NotConcave { at } => write!(f, "curve is not concave near x = {at}"),
            Error::OutOfRange { target, limit } => {
                write!(f, "delta {target} is not reached for any epsilon <= {limit}")
            }
            Error::Heterogeneous => f.write_str(
                "heterogeneous composition is not supported; all rounds must share sensitivity, noise variance and dimension",
            ),
        }
    }
}

impl core::error::Error for Error {}
