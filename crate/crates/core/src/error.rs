use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative weight sample {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight vanishes at index {0}")]
    VanishingWeight(usize),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("empty kernel family")]
    EmptyFamily,
    #[error("empty scale grid")]
    EmptyScaleGrid,
    #[error("kernel is degenerate: {0}")]
    Degenerate(String),
    #[error("finite-difference step underflow at |xi| = {0}")]
    StepUnderflow(f64),
    #[error("normalizer is singular: min Psi = {0:e}")]
    SingularNormalizer(f64),
    #[error("near-origin relation violated: residual {residual:e} at |xi| = {radius}")]
    NearOriginViolated { residual: f64, radius: f64 },
    #[error("decomposition truncation too short: residual {0:e}")]
    TruncationTooShort(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("boundary tail {tail:e} exceeds 5% of integral {integral:e}")]
    BoundaryTail { tail: f64, integral: f64 },
    #[error("scale coverage insufficient: {0}")]
    ScaleCoverage(String),
    #[error("cube too small: {0}")]
    CubeTooSmall(String),
    #[error("malformed container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
