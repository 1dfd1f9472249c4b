use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite at node {node}")]
    NotPositiveDefinite { node: usize },
    #[error("metric determinant {det:e} is not positive at node {node}")]
    NegativeDeterminant { node: usize, det: f64 },
    #[error("graph is not space-like: max |grad u| = {max_gradient} >= 1")]
    NotSpacelike { max_gradient: f64 },
    #[error("dimension {0} is odd; only even dimensions are supported")]
    OddDimension(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field length {found} does not match grid with {expected} nodes")]
    FieldSize { expected: usize, found: usize },
    #[error("field has non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("singular metric (det = {0:e})")]
    SingularMetric(f64),
    #[error("base volume {base_volume} and Euler characteristic {base_euler} are inconsistent (integral gives {implied})")]
    InconsistentBase {
        base_volume: f64,
        base_euler: i64,
        implied: f64,
    },
    #[error("homogeneous constraint violated: |phi - psi^2| = {0:e}")]
    ConstraintViolation(f64),
    #[error("metric determinant {det:e} fell below floor {floor:e} at t = {t}")]
    DegenerateMetric { t: f64, det: f64, floor: f64 },
    #[error("Gauss residual {residual:e} exceeded ceiling {ceiling:e} at t = {t}")]
    ResidualBlowup { t: f64, residual: f64, ceiling: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
