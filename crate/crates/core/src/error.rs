use thiserror::Error;

use crate::dynamics::{PhaseState, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at position {position} ({context})")]
    UnknownIdentifier {
        name: String,
        position: usize,
        context: &'static str,
    },
}

/// Evaluation outside the domain of some sub-expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in '{expr}': {reason}")]
pub struct DomainError {
    /// Rendered offending sub-expression (or a description for derived fields).
    pub expr: String,
    pub reason: String,
}

impl DomainError {
    pub fn new(expr: impl Into<String>, reason: impl Into<String>) -> Self {
        DomainError {
            expr: expr.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("singular metric at ({x}, {y}): |det| = {det:e}")]
    SingularMetric { x: f64, y: f64, det: f64 },
    #[error("signature changes inside the chart (at ({x}, {y}))")]
    SignatureChange { x: f64, y: f64 },
    #[error("determinant ratio is negative at ({x}, {y}); metrics have different signatures")]
    SignatureMismatch { x: f64, y: f64 },
    #[error("invariant violated at ({x}, {y}): {message}")]
    InvariantViolation { x: f64, y: f64, message: String },
    #[error("trajectory left the chart at t = {t}")]
    ChartExit {
        t: f64,
        state: PhaseState,
        partial: Box<Trajectory>,
    },
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64, state: PhaseState },
    #[error("initial covector is null (H = {h:e}); opt into null geodesics explicitly")]
    NullInitialState { h: f64 },
    #[error("velocity vanishes at sample {index}")]
    ZeroVelocity { index: usize },
    #[error("coordinate map is not strictly increasing near {at}")]
    NonMonotone { at: f64 },
    #[error("coefficient {axis} vanishes near ({x}, {y})")]
    CoefficientVanishes { axis: Axis, x: f64, y: f64 },
    #[error("integral coefficient for axis {axis} is not a function of {axis} alone (relative deviation {deviation:e})")]
    NotAxisAligned { axis: Axis, deviation: f64 },
    #[error("not a Liouville (case 1) integral: relative deviation {deviation:e} at ({x}, {y})")]
    NotCase1 { deviation: f64, x: f64, y: f64 },
    #[error("fb + 2i f is not holomorphic: Cauchy-Riemann residual {residual:e} at ({x}, {y})")]
    NotHolomorphic { residual: f64, x: f64, y: f64 },
    #[error(
        "not a Jordan-block (case 3) integral: relative deviation {deviation:e} at ({x}, {y})"
    )]
    NotCase3 { deviation: f64, x: f64, y: f64 },
    #[error("Y-hat vanishes near ({x}, {y})")]
    YhatVanishes { x: f64, y: f64 },
    #[error("integral is a constant multiple of the Hamiltonian (factor {factor})")]
    TrivialIntegral { factor: f64 },
    #[error("ambiguous case: {0}")]
    AmbiguousCase(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
