use thiserror::Error;

pub type Result<T> = std::result::Result<T, MhdError>;

#[derive(Debug, Error)]
pub enum MhdError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("numerical blowup at t = {t} in stage {stage}")]
    Blowup { t: f64, stage: &'static str },

    #[error("time step {dt} exceeds the admissible limit {limit} at t = {t}")]
    Cfl { t: f64, dt: f64, limit: f64 },

    #[error("Picard iteration {iteration} diverged: iterate norm {norm} exceeds 10x the initial norm {initial}")]
    PicardDivergence {
        iteration: usize,
        norm: f64,
        initial: f64,
    },

    #[error("no snapshot stored at t = {0}")]
    MissingSnapshot(f64),

    #[error("empty diagnostics series")]
    EmptySeries,

    #[error("invalid splitting schedule: {0}")]
    InvalidSchedule(String),

    #[error("box policy violation: {0}")]
    BoxPolicy(String),

    #[error("diagnostics series lacks {0}")]
    MissingDiagnostic(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MhdError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        MhdError::Config(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        MhdError::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
