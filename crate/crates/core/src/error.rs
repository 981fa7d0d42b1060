use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("denominator vanishes at {point:?}")]
    Pole { point: Vec<f64> },

    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown variable `{name}` at column {pos}")]
    UnknownVariable { name: String, pos: usize },

    #[error("replacement for x{var} mentions x{var}")]
    SelfSubstitution { var: usize },

    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("stage iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("stage iteration hit the cap of {iterations} iterations (residual {residual:e})")]
    IterationCap { iterations: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("vector field is not quadratic (component {component} has degree {degree})")]
    NotQuadratic { component: usize, degree: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root branches collide near {point:?}")]
    AmbiguousRoots { point: Vec<f64> },

    #[error("inconsistent system: {0}")]
    Inconsistent(String),

    #[error("line {line}: {msg}")]
    Spec { line: usize, msg: String },

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("step {index}: {source}")]
    Step { index: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
