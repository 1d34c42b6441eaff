//! Feedback controls: the optimal Markovian pair (ξ*, η*), the γ = 0 and
//! linear benchmarks, and the a-priori trajectory bound.
//!
//! The optimal control at time-to-go τ and state y is
//!
//! ```text
//! ξ*(τ,y) = (2C₁(τ,g(τ,y)) y + sign(y) C₂(τ,g(τ,y))) / (2λ),
//! η*(τ,y) = sign(y)(|y| - β(τ))   if |y| > β(τ),   0 otherwise,
//! ```
//!
//! so a dark-pool fill lands the position exactly on the boundary β(τ).

use serde::{Deserialize, Serialize};

use crate::coefficients::{c0, c1_c2_at, c_nodp};
use crate::error::Error;
use crate::params::ModelParams;
use crate::quad;
use crate::sign;
use crate::simulator::PathRecord;
use crate::value_surface::{classify, Region};

/// The control pair prescribed at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlAction {
    /// Rate of the absolutely continuous control (state/time).
    pub xi: f64,
    /// Jump-control size (state units); the dark-pool order.
    pub eta: f64,
    /// Region tag of the state as classified by the prescribing rule; the
    /// linear benchmark carries no model and always reports `Stopping`.
    pub region: Region,
}

/// A Markovian feedback rule `(time_to_go, state) -> ControlAction`.
///
/// Implementations must be pure in the sense that the returned action
/// depends only on the arguments; the simulator relies on this for its
/// reproducibility contract.
pub trait Strategy: Sync {
    fn action(&self, time_to_go: f64, state: f64) -> Result<ControlAction, Error>;
}

impl<F> Strategy for F
where
    F: Fn(f64, f64) -> Result<ControlAction, Error> + Sync,
{
    fn action(&self, time_to_go: f64, state: f64) -> Result<ControlAction, Error> {
        self(time_to_go, state)
    }
}

/// Optimal feedback control at (time_to_go, state).
///
/// In the stopping region ξ* = C₀(τ)y/λ and η* = 0; outside, the coefficients
/// are evaluated at the interpolation index and η* trims the position to the
/// boundary. The α = 0 case uses the two-region specialization (ξ* = y/τ
/// inside the boundary).
pub fn optimal_control(
    params: &ModelParams,
    time_to_go: f64,
    state: f64,
) -> Result<ControlAction, Error> {
    let cls = classify(params, time_to_go, state)?;
    let xi = match cls.region {
        Region::Stopping => c0(params, time_to_go)? * state / params.lambda,
        _ => {
            let (c1, c2) = c1_c2_at(params, time_to_go, cls.s_index);
            (2.0 * c1 * state + sign(state) * c2) / (2.0 * params.lambda)
        }
    };
    let eta = match cls.region {
        Region::Stopping => 0.0,
        _ => state - sign(state) * cls.beta,
    };
    Ok(ControlAction {
        xi,
        eta,
        region: cls.region,
    })
}

/// γ = 0 benchmark control: ξ = C(τ)y/λ and η = full remaining position.
/// Optimal when adverse selection is free; used here as a suboptimal
/// strategy for the γ > 0 cost functional.
pub fn nodp_control(
    params: &ModelParams,
    time_to_go: f64,
    state: f64,
) -> Result<ControlAction, Error> {
    let cls = classify(params, time_to_go, state)?;
    Ok(ControlAction {
        xi: c_nodp(params, time_to_go)? * state / params.lambda,
        eta: state,
        region: cls.region,
    })
}

/// Constant-rate liquidation: ξ ≡ initial_state/horizon, η ≡ 0. Admissible
/// for any parameters; the baseline that makes `A(T,x)` nonempty.
pub fn linear_control(initial_state: f64, horizon: f64) -> Result<LinearStrategy, Error> {
    if horizon <= 0.0 || !horizon.is_finite() {
        return Err(Error::NonpositiveTime {
            name: "horizon",
            value: horizon,
        });
    }
    Ok(LinearStrategy {
        rate: initial_state / horizon,
    })
}

/// Optimal feedback rule bound to a parameter set.
#[derive(Debug, Clone, Copy)]
pub struct OptimalStrategy {
    pub params: ModelParams,
}

impl Strategy for OptimalStrategy {
    fn action(&self, time_to_go: f64, state: f64) -> Result<ControlAction, Error> {
        optimal_control(&self.params, time_to_go, state)
    }
}

/// γ = 0 benchmark rule bound to a parameter set.
#[derive(Debug, Clone, Copy)]
pub struct NodpStrategy {
    pub params: ModelParams,
}

impl Strategy for NodpStrategy {
    fn action(&self, time_to_go: f64, state: f64) -> Result<ControlAction, Error> {
        nodp_control(&self.params, time_to_go, state)
    }
}

/// Constant-rate rule from `linear_control`.
#[derive(Debug, Clone, Copy)]
pub struct LinearStrategy {
    pub rate: f64,
}

impl Strategy for LinearStrategy {
    fn action(&self, _time_to_go: f64, _state: f64) -> Result<ControlAction, Error> {
        Ok(ControlAction {
            xi: self.rate,
            eta: 0.0,
            region: Region::Stopping,
        })
    }
}

/// Gronwall bound on the no-jump optimal trajectory:
/// `|X*(t)| ≤ |x| exp(-∫₀ᵗ C₁(T-s,0)/λ ds)`, evaluated by quadrature.
///
/// The integral has the closed form `exp(θt/2) sinh(θ̃(T-t)/2)/sinh(θ̃T/2)`
/// (see the matching test); it tends to 0 as t → T because C₁(τ,0)/λ ~ 1/τ.
pub fn trajectory_bound(params: &ModelParams, t_horizon: f64, x: f64, t: f64) -> Result<f64, Error> {
    if t_horizon <= 0.0 || !t_horizon.is_finite() {
        return Err(Error::NonpositiveTime {
            name: "T",
            value: t_horizon,
        });
    }
    if !(0.0..t_horizon).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: t_horizon,
        });
    }
    let lambda = params.lambda;
    let integral = quad::integrate(
        |s| c_nodp(params, t_horizon - s).expect("T - s > 0 on [0, t]") / lambda,
        0.0,
        t,
        1e-12,
    );
    Ok(x.abs() * (-integral).exp())
}

/// No-jump optimal trajectory: integrates `state' = -ξ*(T-t, state)` with
/// classical RK4 at fixed step `dt`, stopping at the last grid point before
/// `T - dt` (the feedback gain blows up like 1/τ at the horizon).
///
/// For a starting point x = X̄(T,S) the path reproduces X̄(T-t, S) until the
/// boundary-crossing time t = T-S and stays below β(T-t) afterwards.
pub fn deterministic_trajectory(
    params: &ModelParams,
    t_horizon: f64,
    x: f64,
    dt: f64,
) -> Result<PathRecord, Error> {
    if t_horizon <= 0.0 || !t_horizon.is_finite() {
        return Err(Error::NonpositiveTime {
            name: "T",
            value: t_horizon,
        });
    }
    if dt <= 0.0 || dt >= t_horizon {
        return Err(Error::StepSize {
            dt,
            horizon: t_horizon,
        });
    }
    // n·dt ≤ T - dt/2 < T, so every RK4 stage sees time-to-go > 0.
    let n_steps = ((t_horizon / dt).round() as usize).saturating_sub(1).max(1);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut rates = Vec::with_capacity(n_steps + 1);
    let mut cum_cost = Vec::with_capacity(n_steps + 1);
    let mut state = x;
    let mut cost = 0.0;
    let mut max_rate = 0.0f64;
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let tau = t_horizon - t;
        let xi = optimal_control(params, tau, state)?.xi;
        times.push(t);
        states.push(state);
        rates.push(xi);
        cum_cost.push(cost);
        max_rate = max_rate.max(xi.abs());
        if k == n_steps {
            break;
        }
        // Left-endpoint cost accumulation; the path itself is 4th order.
        cost += (params.lambda * xi * xi + params.alpha * state * state) * dt;
        let k1 = -xi;
        let k2 = -optimal_control(params, tau - 0.5 * dt, state + 0.5 * dt * k1)?.xi;
        let k3 = -optimal_control(params, tau - 0.5 * dt, state + 0.5 * dt * k2)?.xi;
        let k4 = -optimal_control(params, tau - dt, state + dt * k3)?.xi;
        state += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let terminal_state = state;
    Ok(PathRecord {
        times,
        states,
        xi_applied: rates,
        cumulative_cost: cum_cost,
        jump_times: Vec::new(),
        eta_applied: Vec::new(),
        running_cost: cost,
        terminal_state,
        pre_closeout_state: terminal_state,
        max_abs_rate_pre_closeout: max_rate,
    })
}
