//! Closed-form coefficient functions of the quasi-polynomial value function.
//!
//! For fixed interpolation index S, the coefficients solve the initial value
//! problems (on T ∈ [S, ∞))
//!
//! ```text
//! C₁' = α - C₁²/λ - θC₁,                      C₁(S,S) = C₀(S),
//! C₂' = γ - C₂ (C₁/λ + θ),                    C₂(S,S) = 0,
//! C₃' = -θC₃ - γ²/(4θC₀(T)) - C₂²/(4λ),       C₃(S,S) = 0,
//! X̄'  = C₁X̄/λ + C₂/(2λ),                      X̄(S,S) = γ/(2θC₀(S)),
//! ```
//!
//! whose solutions are hyperbolic expressions in `θ̃ = sqrt(θ² + 4α/λ)`.
//! All formulas here are algebraically rearranged so that every building
//! block is an `exp_m1` of a nonpositive (or small) argument: the naive
//! forms suffer catastrophic cancellation as S → ∞ (where μ(S) → 1) and
//! overflow once `θ̃T/2` exceeds a few hundred, while the coefficients
//! themselves are O(1) ratios.
//!
//! C₃ has no elementary closed form; it is evaluated by adaptive
//! Gauss-Kronrod quadrature of its integral representation
//!
//! ```text
//! C₃(T,S) = -∫_S^T exp(θ(S-r)) [ γ²/(4θC₀(T+S-r)) + C₂(T+S-r,S)²/(4λ) ] dr
//! ```
//!
//! to absolute tolerance 1e-10. (The exponent is θ(S-r): solving the C₃
//! initial value problem with an integrating factor and checking the S = 0
//! limit both force this sign.)
//!
//! The α = 0 specialization is a separate code path: α appears in the
//! denominators of the α > 0 closed forms, and the limits simplify to
//! rational expressions in `exp(θ(T-S))`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::ModelParams;
use crate::quad;

/// Absolute tolerance for the C₃ quadrature.
const C3_QUAD_TOL: f64 = 1e-10;

/// The coefficient tuple (C₁, C₂, C₃, X̄) evaluated at a point (T, S).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFrame {
    /// Time-to-go T > 0.
    pub t: f64,
    /// Interpolation index S ∈ [0, T].
    pub s: f64,
    /// Quadratic coefficient, always > 0.
    pub c1: f64,
    /// Linear (|x|) coefficient; > 0 for α > 0 and S < T.
    pub c2: f64,
    /// Constant coefficient; < 0 for S < T.
    pub c3: f64,
    /// No-jump trajectory value X̄(T, S) ≥ 0.
    pub x_bar: f64,
}

fn ensure_horizon(name: &'static str, t: f64) -> Result<(), Error> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveTime { name, value: t })
    }
}

/// C₀(T): coefficient of the jump-free (θ = 0) quadratic value function,
/// `sqrt(λα) coth(sqrt(α/λ) T)`; for α = 0 this degenerates to `λ/T`.
///
/// Strictly decreasing in T, with C₀(T) → ∞ as T → 0 and
/// C₀(T) → sqrt(λα) as T → ∞.
pub fn c0(params: &ModelParams, t: f64) -> Result<f64, Error> {
    ensure_horizon("T", t)?;
    if params.alpha == 0.0 {
        return Ok(params.lambda / t);
    }
    // coth(y) = 1 + 2/(e^{2y} - 1); exp_m1 keeps the T → 0 and T → ∞ ends exact.
    let root = (params.alpha * params.lambda).sqrt();
    let y = (params.alpha / params.lambda).sqrt() * t;
    Ok(root + 2.0 * root / (2.0 * y).exp_m1())
}

/// C(T): coefficient of the γ = 0 benchmark value function
/// `(λθ̃/2) coth(θ̃T/2) - λθ/2`. Coincides with the S → 0 limit C₁(T, 0).
pub fn c_nodp(params: &ModelParams, t: f64) -> Result<f64, Error> {
    ensure_horizon("T", t)?;
    // (λθ̃/2)(coth(z) - 1) + λ(θ̃-θ)/2 with z = θ̃T/2; θ̃-θ via theta_gap.
    Ok(params.lambda * params.theta_tilde / (params.theta_tilde * t).exp_m1()
        + params.lambda * params.theta_gap() / 2.0)
}

/// μ(S) = (2C₀(S) + θλ)/(θ̃λ) and κ(S) = arcoth(μ(S)), the integration
/// constants fixing C₁(·, S) to its initial value C₀(S).
///
/// Requires α > 0 (C₀ must exceed sqrt(αλ) for μ > 1) and S > 0.
pub fn mu_kappa(params: &ModelParams, s: f64) -> Result<(f64, f64), Error> {
    if params.alpha == 0.0 {
        return Err(Error::AlphaMustBePositive { alpha: params.alpha });
    }
    ensure_horizon("S", s)?;
    let mu_m1 = mu_minus_one(params, s);
    // arcoth(μ) = ln((μ+1)/(μ-1))/2 = ln1p(2/(μ-1))/2.
    Ok((1.0 + mu_m1, 0.5 * (2.0 / mu_m1).ln_1p()))
}

/// μ(S) - 1, arranged as a sum of positive terms.
///
/// The direct form (2C₀(S) + θλ - θ̃λ)/(θ̃λ) cancels to zero digits as
/// S → ∞ (C₀ → sqrt(αλ), μ → 1⁺). Substituting C₀ = sqrt(αλ) coth(y) and
/// θ̃ - 2sqrt(α/λ) = θ²/(θ̃ + 2sqrt(α/λ)) gives
///
/// ```text
/// μ - 1 = (2 sqrt(αλ)/(θ̃λ)) [ 2/(e^{2y} - 1) + (θ + θ²/(θ̃ + 2 sqrt(α/λ)))/(θ̃ + θ) ]
/// ```
fn mu_minus_one(params: &ModelParams, s: f64) -> f64 {
    let root = (params.alpha * params.lambda).sqrt();
    let ratio = (params.alpha / params.lambda).sqrt();
    let y = ratio * s;
    let tail = (params.theta + params.theta * params.theta / (params.theta_tilde + 2.0 * ratio))
        / (params.theta_tilde + params.theta);
    2.0 * root / (params.theta_tilde * params.lambda) * (2.0 / (2.0 * y).exp_m1() + tail)
}

/// Fixed-S context for the α > 0, S > 0 closed forms.
struct IndexGeometry {
    s: f64,
    c0s: f64,
    mu: f64,
    kappa: f64,
}

impl IndexGeometry {
    fn new(params: &ModelParams, s: f64) -> Result<Self, Error> {
        let c0s = c0(params, s)?;
        let (mu, kappa) = mu_kappa(params, s)?;
        Ok(Self { s, c0s, mu, kappa })
    }

    /// C₁(T, S) = (λθ̃/2) coth(θ̃(T-S)/2 + κ) - λθ/2.
    fn c1(&self, params: &ModelParams, t: f64) -> f64 {
        let u = t - self.s;
        params.lambda * params.theta_tilde / (params.theta_tilde * u + 2.0 * self.kappa).exp_m1()
            + params.lambda * params.theta_gap() / 2.0
    }

    /// C₂(T, S), fused so the O(u) result near T = S is not formed as a
    /// difference of O(1) quantities. Substituting λθ̃μ = 2C₀(S) + θλ into
    /// the closed form collapses it to
    ///
    /// ```text
    /// C₂ = γ/(2α) · N/D,
    /// N  = ((4α - 2θC₀(S))/θ̃) sinh(z) + 2C₀(S)(cosh(z) - e^{-θu/2}),
    /// D  = μ sinh(z) + cosh(z),        z = θ̃u/2,
    /// ```
    ///
    /// and dividing both by e^z leaves only exp_m1 terms of nonpositive
    /// argument.
    fn c2(&self, params: &ModelParams, t: f64) -> f64 {
        let u = t - self.s;
        let e2 = (-params.theta_tilde * u).exp_m1();
        let eb = (-(params.theta_tilde + params.theta) / 2.0 * u).exp_m1();
        let n = -(4.0 * params.alpha - 2.0 * params.theta * self.c0s) / params.theta_tilde * e2
            / 2.0
            + 2.0 * self.c0s * (e2 / 2.0 - eb);
        let d = (self.mu * (-e2) + (2.0 + e2)) / 2.0;
        params.gamma / (2.0 * params.alpha) * n / d
    }

    /// X̄(T, S); the additive -γ/(2α) is folded into the cosh term so the
    /// u → 0 limit γ/(2θC₀(S)) comes out without cancellation.
    fn x_bar(&self, params: &ModelParams, t: f64) -> f64 {
        let u = t - self.s;
        let ea = (params.theta_gap() / 2.0 * u).exp_m1();
        let eb = (-(params.theta_tilde + params.theta) / 2.0 * u).exp_m1();
        let sinh_e = (ea - eb) / 2.0; // sinh(z) e^{-θu/2}
        let cosh_e_m1 = (ea + eb) / 2.0; // cosh(z) e^{-θu/2} - 1
        let g = params.gamma;
        (g * self.mu / (2.0 * params.theta * self.c0s)
            + params.theta * g / (2.0 * params.theta_tilde * params.alpha))
            * sinh_e
            + g / (2.0 * params.theta * self.c0s) * (1.0 + cosh_e_m1)
            + g / (2.0 * params.alpha) * cosh_e_m1
    }
}

/// S → 0 limit values (C₁, C₂, X̄)(T, 0) for α > 0, plus e^{θ̃T}-1 reuse.
///
/// Two exp_m1 evaluations produce all three: with
/// `ea = e^{(θ̃-θ)T/2} - 1` and `eb = e^{-(θ̃+θ)T/2} - 1`,
/// `e^{θ̃T} - 1 = (ea - eb)/(1 + eb)` and `e^{-θ̃T} - 1 = (eb - ea)/(1 + ea)`.
pub(crate) struct OuterFrame {
    pub c1: f64,
    pub c2: f64,
    pub x_bar0: f64,
}

pub(crate) fn outer_frame(params: &ModelParams, t: f64) -> OuterFrame {
    let g = params.gamma;
    let th = params.theta;
    let tt = params.theta_tilde;
    if params.alpha == 0.0 {
        // (1 + θ·0)e^{θT} - 1 = e^{θT} - 1; X̄ is the constant γT/(2θλ).
        let em = (th * t).exp_m1();
        return OuterFrame {
            c1: params.lambda * th / em,
            c2: g * (1.0 / th - t / em),
            x_bar0: g * t / (2.0 * th * params.lambda),
        };
    }
    let ea = (params.theta_gap() / 2.0 * t).exp_m1();
    let eb = (-(tt + th) / 2.0 * t).exp_m1();
    let exp_pos_m1 = (ea - eb) / (1.0 + eb); // e^{θ̃T} - 1
    let e2 = (eb - ea) / (1.0 + ea); // e^{-θ̃T} - 1
    let c1 = params.lambda * tt / exp_pos_m1 + params.lambda * params.theta_gap() / 2.0;
    // C₂(T,0) = (γλ/2α)(θ̃ (cosh z - e^{-θT/2})/sinh z - θ), z = θ̃T/2,
    // with (cosh z - e^{-θT/2})/sinh z = (2 eb - e2)/e2 after dividing by -e^z/2.
    let c2 = g * params.lambda / (2.0 * params.alpha) * (tt * (2.0 * eb - e2) / e2 - th);
    let sinh_e = (ea - eb) / 2.0;
    let cosh_e_m1 = (ea + eb) / 2.0;
    let x_bar0 = (g / (tt * th * params.lambda) + th * g / (2.0 * tt * params.alpha)) * sinh_e
        + g / (2.0 * params.alpha) * cosh_e_m1;
    OuterFrame { c1, c2, x_bar0 }
}

/// (C₁, C₂) at (T, S) without the C₃ quadrature; the feedback control and
/// the trajectory inversion only need these two.
pub(crate) fn c1_c2_at(params: &ModelParams, t: f64, s: f64) -> (f64, f64) {
    if params.alpha == 0.0 {
        return riskneutral_c1_c2(params, t, s);
    }
    if s == t {
        let c = c0(params, t).expect("t > 0 by caller contract");
        return (c, 0.0);
    }
    if s == 0.0 {
        let f = outer_frame(params, t);
        return (f.c1, f.c2);
    }
    let geo = IndexGeometry::new(params, s).expect("0 < s < t by caller contract");
    (geo.c1(params, t), geo.c2(params, t))
}

/// X̄(T, S) without the rest of the frame; this is the function the
/// index inversion bisects.
pub(crate) fn x_bar_at(params: &ModelParams, t: f64, s: f64) -> f64 {
    if params.alpha == 0.0 {
        return params.gamma * t / (2.0 * params.theta * params.lambda);
    }
    if s == 0.0 {
        return outer_frame(params, t).x_bar0;
    }
    let geo = IndexGeometry::new(params, s).expect("0 < s <= t by caller contract");
    geo.x_bar(params, t)
}

fn riskneutral_c1_c2(params: &ModelParams, t: f64, s: f64) -> (f64, f64) {
    let th = params.theta;
    let u = t - s;
    // (1 + θS)e^{θu} - 1, expanded so u → 0 keeps full precision.
    let em = (th * u).exp_m1();
    let den = (1.0 + th * s) * em + th * s;
    let c1 = params.lambda * th / den;
    let c2 = params.gamma * ((1.0 + th * s) * em / th - u) / den;
    (c1, c2)
}

/// C₃ via adaptive quadrature of its integral representation; `c2_at`
/// supplies C₂(·, S) for the matching α-branch.
fn c3_quadrature(
    params: &ModelParams,
    t: f64,
    s: f64,
    c2_at: impl Fn(f64) -> f64,
) -> f64 {
    let g2 = params.gamma * params.gamma;
    let th = params.theta;
    let integrand = |r: f64| {
        let v = t + s - r;
        let state_term = if params.alpha == 0.0 {
            // 1/C₀(v) = v/λ.
            g2 * v / (4.0 * th * params.lambda)
        } else {
            g2 / (4.0 * th * c0(params, v).expect("v in (0, t]"))
        };
        let c2v = c2_at(v);
        (th * (s - r)).exp() * (state_term + c2v * c2v / (4.0 * params.lambda))
    };
    -quad::integrate(integrand, s, t, C3_QUAD_TOL)
}

/// Evaluates the full coefficient frame (C₁, C₂, C₃, X̄) at (T, S) for α > 0.
///
/// S = T returns the initial conditions (C₀(T), 0, 0, β(T)); S = 0 uses the
/// dedicated limit formulas (the general expressions are indeterminate there
/// because C₀(S) → ∞).
pub fn coeff_frame(params: &ModelParams, t: f64, s: f64) -> Result<CoefficientFrame, Error> {
    if params.alpha == 0.0 {
        return Err(Error::AlphaMustBePositive { alpha: params.alpha });
    }
    ensure_horizon("T", t)?;
    if !(0.0..=t).contains(&s) {
        return Err(Error::IndexOutOfRange { s, t });
    }
    if s == t {
        let c = c0(params, t)?;
        return Ok(CoefficientFrame {
            t,
            s,
            c1: c,
            c2: 0.0,
            c3: 0.0,
            x_bar: params.gamma / (2.0 * params.theta * c),
        });
    }
    if s == 0.0 {
        let f = outer_frame(params, t);
        let c3 = c3_quadrature(params, t, 0.0, |v| outer_frame(params, v).c2);
        return Ok(CoefficientFrame {
            t,
            s,
            c1: f.c1,
            c2: f.c2,
            c3,
            x_bar: f.x_bar0,
        });
    }
    let geo = IndexGeometry::new(params, s)?;
    let c3 = c3_quadrature(params, t, s, |v| geo.c2(params, v));
    Ok(CoefficientFrame {
        t,
        s,
        c1: geo.c1(params, t),
        c2: geo.c2(params, t),
        c3,
        x_bar: geo.x_bar(params, t),
    })
}

/// The α = 0 coefficient frame. X̄ is constant in S (γT/(2θλ)): the
/// interpolation region collapses and only two trading regions remain.
pub fn coeff_frame_riskneutral(
    params: &ModelParams,
    t: f64,
    s: f64,
) -> Result<CoefficientFrame, Error> {
    if params.alpha != 0.0 {
        return Err(Error::AlphaMustBeZero { alpha: params.alpha });
    }
    ensure_horizon("T", t)?;
    if !(0.0..=t).contains(&s) {
        return Err(Error::IndexOutOfRange { s, t });
    }
    let (c1, c2) = riskneutral_c1_c2(params, t, s);
    let c3 = if s == t {
        0.0
    } else {
        c3_quadrature(params, t, s, |v| riskneutral_c1_c2(params, v, s).1)
    };
    Ok(CoefficientFrame {
        t,
        s,
        c1,
        c2,
        c3,
        x_bar: params.gamma * t / (2.0 * params.theta * params.lambda),
    })
}

/// Time derivatives (∂C₁/∂T, ∂C₂/∂T, ∂C₃/∂T) at the frame's (T, S), read off
/// the right-hand sides of the initial value problems. These are exact given
/// the frame; no finite differencing is involved.
pub fn frame_time_derivatives(
    params: &ModelParams,
    frame: &CoefficientFrame,
) -> Result<(f64, f64, f64), Error> {
    let c0t = c0(params, frame.t)?;
    let dc1 = params.alpha - frame.c1 * frame.c1 / params.lambda - params.theta * frame.c1;
    let dc2 = params.gamma - frame.c2 * (frame.c1 / params.lambda + params.theta);
    let dc3 = -params.theta * frame.c3
        - params.gamma * params.gamma / (4.0 * params.theta * c0t)
        - frame.c2 * frame.c2 / (4.0 * params.lambda);
    Ok((dc1, dc2, dc3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2_params() -> ModelParams {
        ModelParams::new(2.5, 6.0, 3.0, 4.0).unwrap()
    }

    fn riskneutral_params() -> ModelParams {
        ModelParams::new(2.5, 6.0, 3.0, 0.0).unwrap()
    }

    // Reference values below were computed with 50-digit arithmetic from the
    // defining formulas (and, for C₃, the integral representation).

    #[test]
    fn c0_limits_and_value() {
        let p = fig2_params();
        // T → ∞: coth → 1, C₀ → sqrt(λα) = sqrt(10).
        assert_relative_eq!(c0(&p, 1e6).unwrap(), 10.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(c0(&p, 1.0).unwrap(), 3.7097978417577007, max_relative = 1e-14);
        // α = 0: λ/T.
        let p0 = riskneutral_params();
        assert_eq!(c0(&p0, 1.0).unwrap(), 2.5);
        assert!(c0(&p, 0.0).is_err());
        assert!(c0(&p, -1.0).is_err());
        // strictly decreasing in T
        assert!(c0(&p, 0.5).unwrap() > c0(&p, 1.0).unwrap());
        assert!(c0(&p, 1.0).unwrap() > c0(&p, 2.0).unwrap());
    }

    #[test]
    fn c_nodp_limits_and_value() {
        // α = 0, T → ∞: θ̃ = θ and (λθ/2)(coth - 1) → 0.
        let p0 = riskneutral_params();
        assert!(c_nodp(&p0, 1e3).unwrap() < 1e-300);
        // T → 0: C(T)·T → λ.
        let p = fig2_params();
        for t in [1e-3, 1e-6, 1e-9] {
            assert_relative_eq!(c_nodp(&p, t).unwrap() * t, p.lambda, max_relative = 1e-2 * t.sqrt().max(1e-7));
        }
        assert_relative_eq!(c_nodp(&p, 1.0).unwrap(), 1.3530838185658164, max_relative = 1e-14);
        // C(T) < C₀(T) whenever θ > 0.
        for t in [0.25, 1.0, 4.0] {
            assert!(c_nodp(&p, t).unwrap() < c0(&p, t).unwrap());
        }
    }

    #[test]
    fn mu_kappa_inverse_identity_and_limits() {
        let p = fig2_params();
        let (mu, kappa) = mu_kappa(&p, 0.9).unwrap();
        assert_relative_eq!(mu, 1.5565498317124587, max_relative = 1e-14);
        assert_relative_eq!(kappa, 0.7623285974646677, max_relative = 1e-14);
        // coth(κ) = μ to 1e-12.
        let coth = 1.0 + 2.0 / (2.0 * kappa).exp_m1();
        assert_relative_eq!(coth, mu, max_relative = 1e-12);
        // S → ∞: μ → (2 sqrt(αλ) + θλ)/(θ̃λ); the rearranged form must not
        // lose the limit to cancellation.
        let (mu_inf, kappa_inf) = mu_kappa(&p, 1e8).unwrap();
        let expected = (2.0 * (p.alpha * p.lambda).sqrt() + p.theta * p.lambda)
            / (p.theta_tilde * p.lambda);
        assert_relative_eq!(mu_inf, expected, max_relative = 1e-12);
        assert!(kappa_inf > 0.0);
        // Domain errors.
        assert!(mu_kappa(&p, 0.0).is_err());
        assert!(mu_kappa(&riskneutral_params(), 1.0).is_err());
    }

    #[test]
    fn frame_initial_conditions_at_s_equal_t() {
        let p = fig2_params();
        let f = coeff_frame(&p, 1.0, 1.0).unwrap();
        assert_eq!(f.c1, c0(&p, 1.0).unwrap());
        assert_eq!(f.c2, 0.0);
        assert_eq!(f.c3, 0.0);
        assert_relative_eq!(f.x_bar, 0.26955646713250564, max_relative = 1e-14);
    }

    #[test]
    fn frame_interior_reference_values() {
        let p = fig2_params();
        let f = coeff_frame(&p, 1.0, 0.5).unwrap();
        assert_relative_eq!(f.c1, 1.6086000051686985, max_relative = 1e-13);
        assert_relative_eq!(f.c2, 1.3360879939428261, max_relative = 1e-13);
        assert_relative_eq!(f.c3, -0.21542220414071572, max_relative = 1e-9);
        assert_relative_eq!(f.x_bar, 0.41014047275229592, max_relative = 1e-13);
    }

    #[test]
    fn frame_s0_limit_reference_values() {
        let p = fig2_params();
        let f = coeff_frame(&p, 1.0, 0.0).unwrap();
        assert_eq!(f.c1, c_nodp(&p, 1.0).unwrap());
        assert_relative_eq!(f.c2, 1.5587909506979746, max_relative = 1e-13);
        assert_relative_eq!(f.c3, -0.26400864797821925, max_relative = 1e-9);
        assert_relative_eq!(f.x_bar, 0.46177503393755882, max_relative = 1e-13);
    }

    #[test]
    fn s0_limit_is_continuous() {
        let p = fig2_params();
        let lim = coeff_frame(&p, 1.0, 0.0).unwrap();
        let near = coeff_frame(&p, 1.0, 1e-6).unwrap();
        assert!((lim.c1 - near.c1).abs() < 1e-4);
        assert!((lim.c2 - near.c2).abs() < 1e-4);
        assert!((lim.c3 - near.c3).abs() < 1e-4);
        assert!((lim.x_bar - near.x_bar).abs() < 1e-4);
    }

    #[test]
    fn frame_domain_errors() {
        let p = fig2_params();
        assert!(coeff_frame(&p, 0.0, 0.0).is_err());
        assert!(coeff_frame(&p, 1.0, -0.1).is_err());
        assert!(coeff_frame(&p, 1.0, 1.5).is_err());
        assert!(coeff_frame(&riskneutral_params(), 1.0, 0.5).is_err());
        assert!(coeff_frame_riskneutral(&p, 1.0, 0.5).is_err());
    }

    #[test]
    fn riskneutral_frame_values() {
        let p = riskneutral_params();
        // X̄ = γT/(2θλ) independent of S.
        for s in [0.0, 0.3, 0.7, 1.0] {
            let f = coeff_frame_riskneutral(&p, 1.0, s).unwrap();
            assert_eq!(f.x_bar, 0.4);
        }
        let f = coeff_frame_riskneutral(&p, 1.0, 1.0).unwrap();
        assert_eq!(f.c1, 2.5);
        assert_eq!(f.c2, 0.0);
        assert_eq!(f.c3, 0.0);
        let f0 = coeff_frame_riskneutral(&p, 1.0, 0.0).unwrap();
        assert_relative_eq!(f0.c1, 0.39296772368441964, max_relative = 1e-13);
        assert_relative_eq!(f0.c2, 1.6856258210524643, max_relative = 1e-13);
        assert_relative_eq!(f0.c3, -0.33712516421049286, max_relative = 1e-9);
    }

    #[test]
    fn closed_forms_satisfy_odes_by_finite_differences() {
        // Centered difference in T at step 1e-5 vs the IVP right-hand sides,
        // 1e-6 relative (the spec's consistency requirement).
        let p = fig2_params();
        let h = 1e-5;
        for (t, s) in [(1.0, 0.5), (2.0, 0.25), (0.8, 0.6), (1.5, 1.0), (3.0, 0.01)] {
            let f = coeff_frame(&p, t, s).unwrap();
            let hi = coeff_frame(&p, t + h, s).unwrap();
            let lo = coeff_frame(&p, t - h, s).unwrap();
            let (dc1, dc2, dc3) = frame_time_derivatives(&p, &f).unwrap();
            let dxb = f.c1 / p.lambda * f.x_bar + f.c2 / (2.0 * p.lambda);
            let scale = |v: f64| v.abs().max(1.0);
            assert!(((hi.c1 - lo.c1) / (2.0 * h) - dc1).abs() <= 1e-6 * scale(dc1));
            assert!(((hi.c2 - lo.c2) / (2.0 * h) - dc2).abs() <= 1e-6 * scale(dc2));
            assert!(((hi.c3 - lo.c3) / (2.0 * h) - dc3).abs() <= 1e-6 * scale(dc3));
            assert!(((hi.x_bar - lo.x_bar) / (2.0 * h) - dxb).abs() <= 1e-6 * scale(dxb));
        }
        // Same for the α = 0 branch.
        let p0 = riskneutral_params();
        for (t, s) in [(1.0, 0.5), (2.0, 0.0), (0.7, 0.35)] {
            let f = coeff_frame_riskneutral(&p0, t, s).unwrap();
            let hi = coeff_frame_riskneutral(&p0, t + h, s).unwrap();
            let lo = coeff_frame_riskneutral(&p0, t - h, s).unwrap();
            let (dc1, dc2, dc3) = frame_time_derivatives(&p0, &f).unwrap();
            let scale = |v: f64| v.abs().max(1.0);
            assert!(((hi.c1 - lo.c1) / (2.0 * h) - dc1).abs() <= 1e-6 * scale(dc1));
            assert!(((hi.c2 - lo.c2) / (2.0 * h) - dc2).abs() <= 1e-6 * scale(dc2));
            assert!(((hi.c3 - lo.c3) / (2.0 * h) - dc3).abs() <= 1e-6 * scale(dc3));
        }
    }

    #[test]
    fn ordering_chain_in_s() {
        // 0 < C₁(T,0) < C₁(T,S₁) < C₁(T,S₂) < C₀(T) ≤ λ/T + sqrt(αλ).
        let p = fig2_params();
        for t in [0.25, 1.0, 2.0] {
            let c_bottom = c_nodp(&p, t).unwrap();
            let c_top = c0(&p, t).unwrap();
            assert!(c_bottom > 0.0);
            let mut prev = c_bottom;
            for k in 1..10 {
                let s = t * k as f64 / 10.0;
                let (c1, _) = c1_c2_at(&p, t, s);
                assert!(c1 > prev, "C₁ not increasing in S at t={t}, s={s}");
                prev = c1;
            }
            assert!(prev < c_top);
            assert!(c_top <= p.lambda / t + (p.alpha * p.lambda).sqrt() + 1e-12);
        }
    }

    #[test]
    fn x_bar_strictly_decreasing_in_s() {
        let p = fig2_params();
        for t in [0.5, 1.0, 2.0] {
            let mut prev = x_bar_at(&p, t, 0.0);
            for k in 1..=10 {
                let s = t * k as f64 / 10.0;
                let cur = x_bar_at(&p, t, s);
                assert!(cur < prev, "X̄ not decreasing at t={t}, s={s}");
                prev = cur;
            }
        }
    }

    #[test]
    fn sign_pattern_c2_positive_c3_negative() {
        let p = fig2_params();
        for t in [0.5, 1.0, 2.0] {
            for k in 0..10 {
                let s = t * k as f64 / 10.0;
                let f = coeff_frame(&p, t, s).unwrap();
                assert!(f.c1 > 0.0);
                assert!(f.c2 > 0.0, "C₂ ≤ 0 at t={t}, s={s}");
                assert!(f.c3 < 0.0, "C₃ ≥ 0 at t={t}, s={s}");
            }
        }
    }

    #[test]
    fn gamma_monotonicity_of_coefficients() {
        // At fixed (T,S): C₁ invariant in γ, C₂ strictly increasing,
        // C₃ strictly decreasing, X̄ strictly increasing.
        let gammas = [2.0, 4.0, 6.0, 9.0];
        let (t, s) = (1.0, 0.4);
        let frames: Vec<CoefficientFrame> = gammas
            .iter()
            .map(|&g| coeff_frame(&ModelParams::new(2.5, g, 3.0, 4.0).unwrap(), t, s).unwrap())
            .collect();
        for pair in frames.windows(2) {
            assert_eq!(pair[0].c1, pair[1].c1);
            assert!(pair[1].c2 > pair[0].c2 + 1e-10);
            assert!(pair[1].c3 < pair[0].c3 - 1e-10);
            assert!(pair[1].x_bar > pair[0].x_bar + 1e-10);
        }
    }

    #[test]
    fn stable_at_large_horizon() {
        // θ̃T/2 far beyond overflow territory for naive sinh/cosh.
        let p = fig2_params();
        let f = coeff_frame(&p, 500.0, 0.3).unwrap();
        assert!(f.c1.is_finite() && f.c1 > 0.0);
        assert!(f.c2.is_finite() && f.c2 > 0.0);
        assert!(f.c3.is_finite() && f.c3 < 0.0);
        // C₁(T,S) → λ(θ̃-θ)/2 + ... matches the γ=0 long-horizon limit.
        assert_relative_eq!(f.c1, p.lambda * p.theta_gap() / 2.0, max_relative = 1e-10);
        assert!(c_nodp(&p, 700.0).unwrap().is_finite());
        assert!(c0(&p, 700.0).unwrap().is_finite());
    }
}
