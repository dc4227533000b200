use thiserror::Error;

/// Errors raised by the geometric and analytic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("chart is not an immersion at parameter {param:?} (gram determinant {det:e})")]
    NotImmersed { param: Vec<f64>, det: f64 },
    #[error("holomorphic volume vanishes at parameter {0:?}")]
    ZeroVolume(Vec<f64>),
    #[error("patch is not certified Lagrangian (residual {0:e})")]
    NotCertified(f64),
    #[error("path is not closed (endpoint gap {0:e})")]
    OpenPath(f64),
    #[error("path leaves the parameter domain at {0:?}")]
    OutsideDomain(Vec<f64>),
    #[error("patch is not exact: loop integral of the Liouville form is {0:e}")]
    NonExact(f64),
    #[error("empty integration region")]
    EmptyRegion,
    #[error("truncation radius {available:.4} is below the required {required:.4}")]
    InsufficientTruncation { required: f64, available: f64 },
    #[error("second fundamental form vanishes at the base point; no curvature normalization exists")]
    FlatPoint,
    #[error("patch is not minimal: sup |H| = {0:e}")]
    NonMinimal(f64),
    #[error("projection onto the plane is not injective near radius {radius:.4}")]
    NotGraphical { radius: f64 },
    #[error("requested value lies outside the sampled range")]
    OutOfCoverage,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("tail estimate unavailable: {0}")]
    TailFit(String),
    #[error("chart degenerated after the flow step")]
    ImmersionLost,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("exponent at byte {offset} exceeds the cap of {cap}")]
    ExponentOverflow { offset: usize, cap: u32 },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("root clusters too close to separate (distance {distance:e}, radius {radius:e})")]
    ClusterAmbiguity { distance: f64, radius: f64 },
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),
    #[error("degree {found} outside the supported range {supported}")]
    UnsupportedDegree { found: u32, supported: String },
    #[error("Newton polishing did not converge (last iterate {last:?}, residual {residual:e})")]
    PolishingFailed { last: Vec<f64>, residual: f64 },
    #[error("curve is singular at {0:?}")]
    SingularCurve(Vec<f64>),
}

pub type Result<T> = std::result::Result<T, GeomError>;
