use thiserror::Error;

/// Errors raised by the mapping library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rotation is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("point behind camera (depth {depth:.4})")]
    BehindCamera { depth: f64 },

    /// A sampled surface point came within the near-plane margin of the camera.
    #[error("observation unusable: surface point at depth {min_depth:.4} m")]
    Visibility { min_depth: f64 },

    #[error("need at least {min} surface samples, got {got}")]
    InsufficientSamples { min: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("every observation was skipped; nothing to optimize")]
    NoUsableObservations,

    #[error("degenerate box with half extents {0:?}")]
    DegenerateBox([f64; 3]),

    #[error("detection {0} has no single-view 3D box; use 2D association")]
    MissingSingleView(usize),

    #[error("unknown detection (frame {frame_id}, index {index})")]
    UnknownDetection { frame_id: u64, index: usize },

    #[error("object placement failed after {attempts} attempts; room too crowded")]
    Placement { attempts: usize },

    /// Input file or schema problem. `context` names the file or field.
    #[error("{context}: {message}")]
    Schema { context: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn schema(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Whether this error stems from user input (exit code 2) rather than an
    /// internal failure (exit code 1).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::MissingSingleView(_)
                | Error::InvalidParameter(_)
                | Error::NotOrthonormal { .. }
                | Error::UnknownDetection { .. }
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
