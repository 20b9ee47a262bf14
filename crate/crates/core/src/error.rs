use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("cannot parse quantity `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("under-resolved grid: {steps_per_period:.2} steps per period of the fastest frequency (minimum {minimum})")]
    Resolution { steps_per_period: f64, minimum: f64 },

    #[error("non-finite Hamiltonian sample at t = {t} ns")]
    NonFiniteHamiltonian { t: f64 },

    #[error("initial state not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("CD undefined at crossing: C1 = {c1:e} at t = {t} ns")]
    CdDegenerate { t: f64, c1: f64 },

    #[error("phase undefined at zero of the CD coupling at t = {t} ns")]
    PhaseUndefined { t: f64 },

    #[error("picture mismatch: {0}")]
    PictureMismatch(String),

    #[error("singular sample at t = {t} ns: {reason}")]
    Singular { t: f64, reason: String },

    #[error("design infeasible: {0}")]
    DesignInfeasible(String),

    #[error("constraint set invalid: {0}")]
    Constraints(String),

    #[error("ill-conditioned polynomial system (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("ODE integration failed at t = {t} ns: {reason}")]
    Integration { t: f64, reason: String },
}

pub type Result<T, E = PulseError> = std::result::Result<T, E>;
