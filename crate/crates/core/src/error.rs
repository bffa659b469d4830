use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {value} is outside {range}")]
    InvalidProbability { value: f64, range: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("level {level} is absorbing but is not the top level")]
    AbsorbingLevel { level: usize },

    #[error("long path with {points} points exceeds the cap of {cap} points")]
    PathTooLarge { points: u128, cap: usize },

    #[error("state space of 2^{n} exceeds the full-state cap of 2^{cap}")]
    StateSpaceTooLarge { n: usize, cap: usize },

    #[error("singular linear system while solving fitness class {class}")]
    SingularSystem { class: usize },

    #[error("{theorem}: preconditions violated: {}", .violations.join("; "))]
    Preconditions {
        theorem: &'static str,
        violations: Vec<String>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(value: f64, closed: bool) -> Result<()> {
    let ok = if closed {
        (0.0..=1.0).contains(&value)
    } else {
        value > 0.0 && value < 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidProbability {
            value,
            range: if closed { "[0, 1]" } else { "(0, 1)" },
        })
    }
}
