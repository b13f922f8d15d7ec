use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("boundary projection did not converge for point ({x}, {y})")]
    ProjectionFailed { x: f64, y: f64 },

    #[error("start point ({x}, {y}) is not inside domain `{domain}`")]
    StartOutsideDomain { x: f64, y: f64, domain: String },

    #[error("masks are defined on different grids")]
    GridMismatch,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("requested {requested} complete ON windows but the trajectory holds only {available}")]
    NotEnoughWindows { requested: usize, available: usize },

    #[error("density too small for drift estimation here ({x}, {y})")]
    DensityTooSmall { x: f64, y: f64 },

    #[error("epsilon {epsilon} violates the constraint; maximum feasible epsilon is {max_epsilon}")]
    EpsilonTooLarge { epsilon: f64, max_epsilon: f64 },

    #[error("delta1 = {delta1} is not above the minimum {min_delta1}")]
    InfeasibleDelta1 { delta1: f64, min_delta1: f64 },

    #[error("battery too short for requested epsilon (battery {battery}, minimum delta1 {min_delta1})")]
    BatteryTooShort { battery: f64, min_delta1: f64 },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("too many failed replicates: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::StartOutsideDomain { .. }
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Json(_)
                | Error::EpsilonTooLarge { .. }
                | Error::InfeasibleDelta1 { .. }
                | Error::BatteryTooShort { .. }
                | Error::NotEnoughWindows { .. }
                | Error::EmptyInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
