use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("generator index {index} out of range 1..={rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("generator {0} does not generate a circle action")]
    NotCircleGenerator(usize),

    #[error("point has {got} coordinates, model dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point coordinate {index} = {value} lies outside the chart bounds")]
    OutOfBounds { index: usize, value: f64 },

    #[error("forms live on different models")]
    ModelMismatch,

    #[error("degree {0} is outside the polarised complex")]
    InvalidDegree(i64),

    #[error("ODE integration did not converge (achieved residual {residual:e})")]
    Integrator { residual: f64 },

    #[error("holonomy-trivial point: |Q^-1 - 1| = {gap:e} does not exceed {threshold:e}")]
    HolonomyTrivial { gap: f64, threshold: f64 },

    #[error("form is not closed at the point (residual {residual:e} > {tolerance:e})")]
    NotClosed { residual: f64, tolerance: f64 },

    #[error("division obstruction: function does not vanish on {{Q = 1}} (|f| = {residual:e} at the flow limit)")]
    DivisionObstruction { residual: f64 },

    #[error("division undefined at a degenerate fixed point")]
    DegenerateFixedPoint,

    #[error("window is unbounded in quantised action {0}")]
    UnboundedWindow(usize),

    #[error("polytope is unbounded")]
    UnboundedPolytope,

    #[error("polytope: {0}")]
    InvalidPolytope(String),

    #[error("no theorem applies: {reason}\n{table}")]
    NoTheoremApplies { reason: String, table: String },

    #[error("lattice normalisation unknown: {0}")]
    LatticeNormalisation(String),

    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
