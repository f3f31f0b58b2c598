use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("group size {k} does not divide the number of sources {n}")]
    Divisibility { n: u32, k: u32 },

    #[error("{name} = {value} is outside {range}")]
    Range {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("expected {expected} statuses, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("source index {j} is outside 1..={k}")]
    IndexOutOfRange { j: u32, k: u32 },

    #[error("argument {0} is outside the domain of the requested function")]
    Domain(f64),

    #[error("iteration did not converge for argument {0}")]
    Convergence(f64),

    #[error("need at least {needed} cycles, trace has {actual}")]
    InsufficientData { needed: usize, actual: usize },

    #[error("enumeration needs n <= {max}, got {n}")]
    TooLarge { n: u32, max: u32 },

    #[error("efficiency bracket invalid: {0}")]
    Bracket(String),
}
