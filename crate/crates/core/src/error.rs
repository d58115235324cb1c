use std::path::PathBuf;

use thiserror::Error;

use crate::spectral::ContinuationRun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} outside admissible interval ({lo}, {hi})")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),

    #[error("invalid profile construction: {0}")]
    Construction(String),

    #[error("Newton iteration did not converge after {iterations} iterations (last update {last_update:.3e}, residual {last_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        last_update: f64,
        last_residual: f64,
        trace: Vec<(f64, f64)>,
    },

    #[error("singular Jacobian (condition estimate {condition_estimate:.3e})")]
    SingularJacobian { condition_estimate: f64 },

    #[error("profile lost positivity during Newton iteration (min headway {min:.3e})")]
    LostPositivity { min: f64 },

    #[error("continuation aborted at beta = {beta}: {reason}")]
    ContinuationAborted {
        beta: f64,
        reason: String,
        partial: Box<ContinuationRun>,
    },

    #[error("vehicle {index} collided with its leader at time {time} (headway {headway:.3e})")]
    Collision {
        index: usize,
        time: f64,
        headway: f64,
    },

    #[error("no coherent traveling wave in the headway series (peak correlation {peak:.3})")]
    NoCoherentWave { peak: f64 },

    #[error("insufficient phase coverage: only {fraction:.3} of the bins received samples")]
    InsufficientCoverage { fraction: f64 },

    #[error("degenerate fit window: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::Domain { .. }
            | Error::UnsupportedOrder(_)
            | Error::Construction(_)
            | Error::Config(_)
            | Error::Format { .. }
            | Error::DegenerateFit(_) => 2,
            Error::Verification(_) => 4,
            _ => 3,
        }
    }
}
