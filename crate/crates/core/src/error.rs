use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("clean points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("simplex is degenerate: affine rank {rank}, expected {expected}")]
    DegenerateSimplex { rank: usize, expected: usize },

    #[error("point {0} is not on any ray")]
    NotRays(usize),

    #[error("rays {0} and {1} are not obtuse (cosine {2:.3e})")]
    RaysNotObtuse(usize, usize, f64),

    #[error("geometric median did not converge in {max_iter} iterations")]
    NoConvergence { max_iter: usize, best: Vec<f64> },

    #[error("noise intervals of points {0} and {1} are not well separated")]
    AssumptionViolated(usize, usize),

    #[error("noise extremes of point {0} do not straddle zero")]
    NoiseNotStraddling(usize),

    #[error("norm-balls overlap at point {0}")]
    BallsOverlap(usize),

    #[error("simplex is not obtuse at the requested apex")]
    NotObtuse,

    #[error("simplex is not acute at every vertex")]
    NotAcute,

    #[error("perturbed rays violate successive-difference obtuseness between rays {0} and {1}")]
    A1Violated(usize, usize),

    #[error("perturbed rays violate halfspace nesting on ray {ray} at sample {index}")]
    A2Violated { ray: usize, index: usize },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("training diverged at step {step}")]
    DivergedLoss { step: usize, trace: Vec<f64> },

    #[error("bivariate gaussian is not positive definite")]
    IllConditioned,

    #[error("marginalized loss needs a network without skip connection or biases")]
    ModelShapeUnsupported,

    #[error("quadrature is only available in one dimension")]
    UnsupportedDensity,

    #[error("no unit passed the significance threshold")]
    NoSignificantUnits,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the `denoise` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse { .. } | Error::InvalidParameter(_) | Error::Format(_) => 2,
            _ => 3,
        }
    }
}
