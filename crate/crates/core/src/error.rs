use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // potential model
    #[error("layer {index} has non-positive width {width}")]
    NonPositiveWidth { index: usize, width: f64 },
    #[error("layer {index} has a non-finite height")]
    NonFiniteHeight { index: usize },
    #[error("profile has no layers; use the free-particle flag for an empty potential")]
    EmptyGeometry,
    #[error("radial coordinate must be non-negative, got {0}")]
    NegativeRadius(f64),

    // scattering engine
    #[error("energy {energy} sits on the layer threshold {height}")]
    EnergyAtThreshold { energy: f64, height: f64 },
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("reference length {a} lies inside the potential support (ends at {support_end})")]
    ReferenceInsideSupport { a: f64, support_end: f64 },
    #[error("invalid energy grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value while propagating at E = {0}")]
    Overflow(f64),

    // time delay
    #[error("S-matrix is not unitary (max defect {0:e})")]
    NonUnitaryInput(f64),
    #[error("Q-matrix is not Hermitian (max defect {0:e})")]
    NonHermitian(f64),
    #[error("grid refinement would need {0} points")]
    RefinementLimit(usize),
    #[error("{value} is outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    // resonance fit and oscillator
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("resonance width / friction must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("step {dt} exceeds the stability bound {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("trajectory spans {got:.2} periods, need at least {needed}")]
    TooFewPeriods { got: f64, needed: f64 },

    // wigner bridge
    #[error("energy samples are not on a uniform grid")]
    NonUniformGrid,
    #[error("offset {eps} is not a positive multiple of the grid spacing {de}")]
    OffGridEpsilon { eps: f64, de: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    // io
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("bad CSV header: {0}")]
    BadHeader(String),
    #[error("energies must increase strictly (row {row})")]
    NonMonotonicEnergy { row: usize },
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 4 for IO.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Io { .. } | Json(_) => 4,
            Syntax { .. }
            | UnknownKey { .. }
            | ConstraintViolation(_)
            | BadHeader(_)
            | NonMonotonicEnergy { .. }
            | TooFewRows { .. }
            | Csv(_)
            | NonPositiveWidth { .. }
            | NonFiniteHeight { .. }
            | EmptyGeometry
            | ReferenceInsideSupport { .. }
            | InvalidGrid(_)
            | InvalidInput(_) => 2,
            _ => 3,
        }
    }
}
