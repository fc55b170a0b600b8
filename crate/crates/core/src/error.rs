use thiserror::Error;

use crate::halfint::HalfInt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid magnetic number m={m} for spin j={j}")]
    InvalidMagnetic { j: HalfInt, m: HalfInt },

    #[error("spin j={j} exceeds the supported maximum 2j <= {max_twice}")]
    SpinTooLarge { j: HalfInt, max_twice: i32 },

    #[error("invalid meter: {0}")]
    InvalidMeter(String),

    #[error("meters are not comparable: {0}")]
    MeterMismatch(String),

    /// The postselection probability fell to or below the floor; the QFI is
    /// divergent or undefined there.
    #[error("vanishing postselection probability P={p:e} (floor {floor:e})")]
    VanishingPostselection { p: f64, floor: f64 },

    /// The parallel term does not depend on the postselection phase, so no
    /// choice of phase can suppress it.
    #[error("parallel evolution cannot be suppressed by the postselection phase")]
    NoSuppression,

    #[error("landscape is flat ({0}); no extremum is defined")]
    FlatLandscape(&'static str),

    #[error("finite-difference step {h:e} is too small at lambda={lambda:e}")]
    StepUnderflow { h: f64, lambda: f64 },

    #[error("overlap vanished at path step {step} (conjugate point)")]
    ConjugatePoint { step: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
