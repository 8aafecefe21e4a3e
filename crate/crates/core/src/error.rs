use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("infeasible support: {0}")]
    InfeasibleSupport(String),

    #[error("exponent overflow (max exponent {max_exponent})")]
    Overflow { max_exponent: f64 },

    #[error("kernel underflow: every entry below floor, increase the regularization")]
    KernelUnderflow,

    #[error("transport simplex hit the iteration cap after {iterations} pivots ({degenerate} degenerate)")]
    LpIterationCap { iterations: usize, degenerate: usize },

    #[error("infeasible iterate: marginal violation {violation:e} exceeds {tol:e}")]
    InfeasiblePlan { violation: f64, tol: f64 },

    #[error("step size {alpha} exceeds 1: t_max must be at least {t_min}")]
    StepTooLarge { alpha: f64, t_min: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("truncation removed every element")]
    EmptyTruncation,

    #[error("orphan element {child} (parent {parent} was truncated)")]
    Orphan { child: usize, parent: usize },

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal an infeasible (sampled) subproblem.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::InfeasibleSupport(_) => true,
            Error::Level { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
