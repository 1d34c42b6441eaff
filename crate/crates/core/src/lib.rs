//! Closed-form solution of a constrained linear-quadratic-plus-absolute-value
//! stochastic control problem with Poisson jumps, applied to optimal
//! liquidation with a dark pool under adverse selection.
//!
//! The controlled position follows
//!
//! ```text
//! X(t) = x - ∫₀ᵗ ξ(s) ds - ∫₀ᵗ η(s) dπ(s),        X(t) → 0 as t → T,
//! ```
//!
//! with π a Poisson process of intensity θ, and costs
//! `E[∫₀ᵀ λξ² + γ|η| + αX² dt]`. The value function is a quasi-polynomial
//! `w(T,x) = C₁x² + C₂|x| + C₃` whose coefficients depend on the state
//! through an interpolation index `S = g(T,x)`, the inverse of the no-jump
//! trajectory `X̄(T,·)`. Everything is available in closed form.
//!
//! Module map:
//! - [`params`]: the abstract model parameters (λ, γ, θ, α).
//! - [`coefficients`]: the coefficient functions C₀, C, C₁, C₂, C₃, X̄.
//! - [`value_surface`]: free boundary β, index g, value w and derivatives.
//! - [`control`]: optimal feedback (ξ*, η*), benchmark controls, bounds.
//! - [`hjb`]: numerical certification that w solves the HJB equation.
//! - [`simulator`]: seeded, event-driven Monte Carlo for the jump process.
//! - [`market`]: dark-pool market layer (prices, proceeds, cost identity).

pub mod coefficients;
pub mod control;
pub mod error;
pub mod hjb;
pub mod market;
pub mod params;
pub mod simulator;
pub mod value_surface;

mod quad;

pub use coefficients::{c0, c_nodp, coeff_frame, coeff_frame_riskneutral, mu_kappa, CoefficientFrame};
pub use control::{
    deterministic_trajectory, linear_control, nodp_control, optimal_control, trajectory_bound,
    ControlAction, LinearStrategy, NodpStrategy, OptimalStrategy, Strategy,
};
pub use error::Error;
pub use hjb::{hamiltonian, minimizer_scan, residual_scan, HjbReport};
pub use market::{realized_proceeds, simulate_price, to_model_params, MarketParams, PricePath, ProceedsRecord};
pub use params::ModelParams;
pub use simulator::{
    estimate_cost, sample_jump_times, simulate_path, terminal_diagnostics, CostEstimate, CostMode,
    Integrator, PathRecord, SimConfig, TerminalSummary,
};
pub use value_surface::{boundary, g_index, value, value_riskneutral, Region, ValuePoint};

/// Sign convention used throughout: `sign(0) = 0`, otherwise ±1.
///
/// `f64::signum` maps 0.0 to 1.0, which is wrong for the control formulas
/// (ξ*(T,0) must be 0).
pub(crate) fn sign(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 0.0 {
        1.0
    } else {
        -1.0
    }
}
