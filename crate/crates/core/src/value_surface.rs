//! Free boundary, interpolation index and the candidate value function.
//!
//! The state space at time-to-go T splits into three regions:
//!
//! - stopping: |x| ≤ β(T) = γ/(2θC₀(T)); no dark-pool order, w = C₀(T)x².
//! - interpolation: β(T) < |x| < X̄(T,0); w is the quasi-polynomial with
//!   coefficients frozen at the index S = g(T,x), the unique solution of
//!   X̄(T,S) = |x|.
//! - outer: |x| ≥ X̄(T,0); coefficients at S = 0.
//!
//! `g(T,·)` is the inverse of the strictly decreasing map S ↦ X̄(T,S) and is
//! computed by bisection (unconditionally convergent; the S-derivative of X̄
//! has no convenient closed form here, so Newton steps are not used).
//!
//! For α = 0 the trajectory X̄ is constant in S, the interpolation region is
//! empty and the value function is the explicit two-region formula; it is
//! continuous with continuous ∂w/∂x but its second derivative jumps at the
//! boundary.

use serde::{Deserialize, Serialize};

use crate::coefficients::{self, c0, coeff_frame, coeff_frame_riskneutral, frame_time_derivatives};
use crate::error::Error;
use crate::params::ModelParams;
use crate::sign;

/// Relative tolerance of the index inversion: |X̄(T,S) - |x|| ≤ tol·max(1,|x|).
const INVERSION_TOL: f64 = 1e-12;
/// Iteration cap for the bisection.
const INVERSION_MAX_ITER: u32 = 200;
/// Smallest admissible time-to-go for value evaluation.
const MIN_TIME_TO_GO: f64 = 1e-9;

/// State-space region at a given (T, x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// |x| ≤ β(T): optimal dark-pool order is zero.
    Stopping,
    /// β(T) < |x| < X̄(T,0): quasi-polynomial interpolation.
    Interpolation,
    /// |x| ≥ X̄(T,0): coefficients at S = 0.
    Outer,
}

/// Value function w(T,x) together with its partial derivatives and the
/// interpolation index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuePoint {
    pub t: f64,
    pub x: f64,
    /// g(T,x) ∈ [0, T]; T in the stopping region, 0 in the outer region.
    pub s_index: f64,
    pub region: Region,
    /// w(T,x) ≥ 0.
    pub w: f64,
    /// ∂w/∂x = 2C₁x + sign(x)C₂, odd in x.
    pub dw_dx: f64,
    /// ∂²w/∂x² = 2C₁(T, g(T,x)) > 0.
    pub d2w_dx2: f64,
    /// ∂w/∂T.
    pub dw_dt: f64,
}

fn ensure_horizon(t: f64) -> Result<(), Error> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveTime { name: "T", value: t })
    }
}

/// Free boundary β(T) = γ/(2θC₀(T)); for α = 0 this is γT/(2θλ).
/// Strictly increasing in T with β(T) → 0 as T → 0.
pub fn boundary(params: &ModelParams, t: f64) -> Result<f64, Error> {
    Ok(params.gamma / (2.0 * params.theta * c0(params, t)?))
}

/// Classification outcome shared by `g_index`, `value` and the feedback
/// control: region, index, and the boundary values used to decide.
pub(crate) struct Classified {
    pub region: Region,
    pub s_index: f64,
    pub beta: f64,
}

/// Region membership uses closed intervals (|x| ≤ β stopping, |x| ≥ X̄(T,0)
/// outer); ties resolve toward the explicit-formula regions.
pub(crate) fn classify(params: &ModelParams, t: f64, x: f64) -> Result<Classified, Error> {
    ensure_horizon(t)?;
    let beta = params.gamma / (2.0 * params.theta * c0(params, t)?);
    let a = x.abs();
    if a <= beta {
        return Ok(Classified {
            region: Region::Stopping,
            s_index: t,
            beta,
        });
    }
    if params.alpha == 0.0 {
        // X̄ ≡ β: only two regions.
        return Ok(Classified {
            region: Region::Outer,
            s_index: 0.0,
            beta,
        });
    }
    let x_outer = coefficients::x_bar_at(params, t, 0.0);
    if a >= x_outer {
        return Ok(Classified {
            region: Region::Outer,
            s_index: 0.0,
            beta,
        });
    }
    Ok(Classified {
        region: Region::Interpolation,
        s_index: invert_x_bar(params, t, a),
        beta,
    })
}

/// Bisection for the unique S ∈ (0,T) with X̄(T,S) = a, given
/// X̄(T,0) > a > X̄(T,T). X̄(T,·) is strictly decreasing, so the bracket
/// keeps f(lo) > 0 > f(hi).
fn invert_x_bar(params: &ModelParams, t: f64, a: f64) -> f64 {
    let tol = INVERSION_TOL * a.abs().max(1.0);
    let (mut lo, mut hi) = (0.0_f64, t);
    let mut mid = 0.5 * t;
    for _ in 0..INVERSION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let f = coefficients::x_bar_at(params, t, mid) - a;
        if f.abs() <= tol {
            return mid;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * t {
            break;
        }
    }
    mid
}

/// Interpolation index g(T,x): T on the stopping region, 0 on the outer
/// region, otherwise the inverse of X̄(T,·) at |x|. For α = 0 the rule
/// degenerates to the two-region form (no interpolation interval).
pub fn g_index(params: &ModelParams, t: f64, x: f64) -> Result<f64, Error> {
    Ok(classify(params, t, x)?.s_index)
}

/// Value function and derivatives at (T, x). Dispatches to the α = 0
/// two-region formula when the parameters are risk-neutral.
///
/// Requires T ≥ 1e-9: the terminal constraint makes w(T,x) → ∞ for x ≠ 0 as
/// T → 0, and coefficient evaluation degrades in its last digits there.
pub fn value(params: &ModelParams, t: f64, x: f64) -> Result<ValuePoint, Error> {
    ensure_horizon(t)?;
    if t < MIN_TIME_TO_GO {
        return Err(Error::HorizonBelowGuard {
            t,
            min: MIN_TIME_TO_GO,
        });
    }
    if params.alpha == 0.0 {
        return value_riskneutral(params, t, x);
    }
    let cls = classify(params, t, x)?;
    Ok(assemble(params, t, x, cls.region, cls.s_index)?)
}

/// The α = 0 value function: (λ/T)x² for |x| ≤ γT/(2θλ), otherwise the
/// S = 0 quasi-polynomial. Continuous with continuous ∂w/∂x across the
/// boundary; ∂²w/∂x² jumps from 2λ/T to 2C₁(T,0).
pub fn value_riskneutral(params: &ModelParams, t: f64, x: f64) -> Result<ValuePoint, Error> {
    if params.alpha != 0.0 {
        return Err(Error::AlphaMustBeZero { alpha: params.alpha });
    }
    ensure_horizon(t)?;
    if t < MIN_TIME_TO_GO {
        return Err(Error::HorizonBelowGuard {
            t,
            min: MIN_TIME_TO_GO,
        });
    }
    let cls = classify(params, t, x)?;
    Ok(assemble(params, t, x, cls.region, cls.s_index)?)
}

fn assemble(
    params: &ModelParams,
    t: f64,
    x: f64,
    region: Region,
    s_index: f64,
) -> Result<ValuePoint, Error> {
    match region {
        Region::Stopping => {
            let c = c0(params, t)?;
            Ok(ValuePoint {
                t,
                x,
                s_index,
                region,
                w: c * x * x,
                dw_dx: 2.0 * c * x,
                d2w_dx2: 2.0 * c,
                // C₀ solves the Riccati equation C₀' = α - C₀²/λ.
                dw_dt: (params.alpha - c * c / params.lambda) * x * x,
            })
        }
        Region::Interpolation | Region::Outer => {
            let frame = if params.alpha == 0.0 {
                coeff_frame_riskneutral(params, t, s_index)?
            } else {
                coeff_frame(params, t, s_index)?
            };
            let a = x.abs();
            let (dc1, dc2, dc3) = frame_time_derivatives(params, &frame)?;
            Ok(ValuePoint {
                t,
                x,
                s_index,
                region,
                w: frame.c1 * x * x + frame.c2 * a + frame.c3,
                dw_dx: 2.0 * frame.c1 * x + sign(x) * frame.c2,
                d2w_dx2: 2.0 * frame.c1,
                // In the interpolation region the implicit S-dependence drops
                // out: ∂C₁/∂S X̄² + ∂C₂/∂S X̄ + ∂C₃/∂S = 0 along X̄(T,S) = |x|.
                dw_dt: dc1 * x * x + dc2 * a + dc3,
            })
        }
    }
}
