//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by constructors, closed-form evaluators and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or market parameter violates its sign constraint.
    #[error("invalid parameter {name} = {value}: must be {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A time / horizon argument that must be strictly positive is not.
    #[error("nonpositive time argument {name} = {value}")]
    NonpositiveTime { name: &'static str, value: f64 },

    /// Interpolation index outside `[0, T]`.
    #[error("index S = {s} outside [0, {t}]")]
    IndexOutOfRange { s: f64, t: f64 },

    /// Operation requires strictly positive state-cost weight α.
    #[error("operation requires alpha > 0 (got alpha = {alpha}); use the risk-neutral variant")]
    AlphaMustBePositive { alpha: f64 },

    /// Operation is the α = 0 specialization but α ≠ 0 was supplied.
    #[error("risk-neutral operation requires alpha = 0 (got alpha = {alpha})")]
    AlphaMustBeZero { alpha: f64 },

    /// Evaluation time outside the admissible window `[0, T)`.
    #[error("time t = {t} outside [0, {horizon})")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// Time-to-go below the terminal-singularity guard (w(T,x) → ∞ as T → 0
    /// for x ≠ 0).
    #[error("time-to-go T = {t} below the singularity guard {min}")]
    HorizonBelowGuard { t: f64, min: f64 },

    /// Integration step does not resolve the horizon.
    #[error("step dt = {dt} must be positive and smaller than the horizon {horizon}")]
    StepSize { dt: f64, horizon: f64 },

    /// Simulator configuration violates an invariant.
    #[error("invalid simulation config: {reason}")]
    InvalidConfig { reason: String },

    /// A user-supplied feedback rule failed during path integration.
    #[error("strategy evaluation failed on path {path} at t = {t}: {source}")]
    StrategyFailure {
        path: u64,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// Path and price series do not share a grid.
    #[error("grid mismatch between position path and price path: {reason}")]
    GridMismatch { reason: String },
}
