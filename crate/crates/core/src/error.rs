use thiserror::Error;

#[derive(Error, Debug)]
pub enum GrowthError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("window is empty on axis {axis}: [{lo}, {hi}]")]
    EmptyWindow { axis: usize, lo: f64, hi: f64 },
    #[error("box too small to shrink on axis {axis} (need at least 3 cells, have {len})")]
    BoxTooSmall { axis: usize, len: i64 },
    #[error("point {point:?} at time {time} is outside the light-cone-guaranteed region")]
    OutsideLightCone { point: Vec<f64>, time: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("first-derivative symmetry at 0 violated on axis {axis}: {plus} vs {minus}")]
    AsymmetricGradient { axis: usize, plus: f64, minus: f64 },
    #[error("initial profile {0:?} is not a cosine sum in x_1")]
    NonCosineProfile(String),
    #[error("CFL condition violated: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("oracle {oracle} is incompatible with {scaling} scaling of driver {driver}")]
    OracleScalingMismatch {
        oracle: String,
        scaling: String,
        driver: String,
    },
    #[error("projected {projected:.3e} site-updates exceed the resource cap {cap:.3e}")]
    ResourceCap { projected: f64, cap: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown {kind} name {name:?}")]
    UnknownName { kind: &'static str, name: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GrowthError>;
