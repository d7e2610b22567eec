use alloc::string::String;

/// Errors produced by the reconstruction toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid state matrix: {0}")]
    InvalidStates(String),
    #[error("infeasible degree sequence: {0}")]
    Infeasible(String),
    #[error("network generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("labels are degenerate: {positives} positive and {negatives} negative pairs")]
    DegenerateLabels { positives: usize, negatives: usize },
    #[error(
        "power iteration did not converge after {iterations} iterations \
         (estimate {estimate}, last change {change:e})"
    )]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        change: f64,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, inf)",
        })
    }
}
