use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("N = {0} must be a positive multiple of 6")]
    InvalidMeshSize(usize),

    #[error("assumption eps <= 1/N violated: eps = {epsilon}, N = {n}")]
    AssumptionViolated { epsilon: f64, n: usize },

    #[error("transition parameter saturated its cap ({0}); disable strict mode to allow this")]
    CappedTransition(&'static str),

    #[error("point ({0}, {1}) lies outside the unit square")]
    PointOutsideDomain(f64, f64),

    #[error("unsupported quadrature degree {0} (supported: 1..=10)")]
    UnsupportedQuadratureDegree(usize),

    #[error("node ({0}, {1}) is not an interior mesh node")]
    NotInteriorNode(usize, usize),

    #[error("function lives on a mesh with N = {found}, expected N = {expected}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("derivative order ({0}, {1}) exceeds total order 2")]
    DerivativeOrder(usize, usize),

    #[error("zero pivot encountered at row {0}")]
    SingularMatrix(usize),

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("quadrature degree {low} and {high} disagree: relative difference {rel_diff:e}")]
    QuadratureDisagreement {
        low: usize,
        high: usize,
        rel_diff: f64,
    },

    #[error("weight property violated: {0}")]
    WeightProperty(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
