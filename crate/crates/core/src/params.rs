//! Abstract problem parameters.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Parameters of the abstract control problem; the single source of truth
/// for every closed-form formula in this crate.
///
/// Cost functional: `E[∫₀ᵀ λξ(t)² + γ|η(t)| + αX(t)² dt]` with jump
/// intensity θ. The derived rate `θ̃ = sqrt(θ² + 4α/λ)` shows up in all
/// hyperbolic closed forms and is precomputed here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Quadratic cost weight λ > 0 on the absolutely continuous control.
    pub lambda: f64,
    /// Absolute-value cost weight γ > 0 on the jump control.
    pub gamma: f64,
    /// Poisson intensity θ > 0 (1/time).
    pub theta: f64,
    /// State cost weight α ≥ 0.
    pub alpha: f64,
    /// Derived rate `sqrt(θ² + 4α/λ)`; equals θ iff α = 0.
    pub theta_tilde: f64,
}

impl ModelParams {
    /// Validates the sign constraints and precomputes θ̃.
    pub fn new(lambda: f64, gamma: f64, theta: f64, alpha: f64) -> Result<Self, Error> {
        let check = |name: &'static str, value: f64, ok: bool, constraint: &'static str| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint,
                })
            }
        };
        check("lambda", lambda, lambda > 0.0, "> 0")?;
        check("gamma", gamma, gamma > 0.0, "> 0")?;
        check("theta", theta, theta > 0.0, "> 0")?;
        check("alpha", alpha, alpha >= 0.0, ">= 0")?;
        Ok(Self {
            lambda,
            gamma,
            theta,
            alpha,
            theta_tilde: (theta * theta + 4.0 * alpha / lambda).sqrt(),
        })
    }

    /// True in the risk-neutral specialization α = 0, which has its own
    /// (simpler) closed forms.
    pub fn is_risk_neutral(&self) -> bool {
        self.alpha == 0.0
    }

    /// `θ̃ - θ`, computed without cancellation as `4α / (λ(θ̃ + θ))`.
    pub(crate) fn theta_gap(&self) -> f64 {
        4.0 * self.alpha / (self.lambda * (self.theta_tilde + self.theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_tilde_dominates_theta() {
        let p = ModelParams::new(2.5, 6.0, 3.0, 4.0).unwrap();
        assert!(p.theta_tilde > p.theta);
        let p0 = ModelParams::new(2.5, 6.0, 3.0, 0.0).unwrap();
        assert_eq!(p0.theta_tilde, p0.theta);
        assert!(p0.is_risk_neutral());
    }

    #[test]
    fn theta_gap_matches_difference() {
        let p = ModelParams::new(2.5, 6.0, 3.0, 4.0).unwrap();
        let direct = p.theta_tilde - p.theta;
        assert!((p.theta_gap() - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(0.0, 6.0, 3.0, 4.0).is_err());
        assert!(ModelParams::new(2.5, -1.0, 3.0, 4.0).is_err());
        assert!(ModelParams::new(2.5, 6.0, 0.0, 4.0).is_err());
        assert!(ModelParams::new(2.5, 6.0, 3.0, -0.1).is_err());
        assert!(ModelParams::new(f64::NAN, 6.0, 3.0, 4.0).is_err());
    }
}
