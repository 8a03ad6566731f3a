use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("empty or non-finite integration interval [{t0}, {t1}]")]
    EmptyInterval { t0: f64, t1: f64 },
    #[error("required step {step:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, step: f64 },
    #[error("exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("integration path passes through the singular point τ = 0")]
    PathThroughSingularity,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Integration(#[from] OdeError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    BracketInvalid { lo: f64, hi: f64 },
    #[error("canonical series recurrence is singular (s = 0)")]
    RecurrenceSingular,
    #[error("no seed radius with truncation agreement below {tolerance:e} (best {best:e})")]
    SeedInaccurate { tolerance: f64, best: f64 },
    #[error("winding integral {value} is not close to an integer")]
    WindingNotIntegral { value: f64 },
    #[error("adjacency refinement diverged near (a, s) = ({a}, {s}): {reason}")]
    RefinementDiverged { a: f64, s: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
