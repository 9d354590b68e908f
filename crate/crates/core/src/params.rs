//! Parameter sets for the GIG subordinator and the GH process.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// GIG(λ, δ, γ) Lévy process parameters.
///
/// The marginal at the horizon has density proportional to
/// x^{λ-1} exp(-(δ²/x + γ² x)/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub lambda: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl GigParams {
    pub fn new(lambda: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = Self { lambda, delta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { lambda, delta, gamma } = *self;
        if !(lambda.is_finite() && delta.is_finite() && gamma.is_finite()) {
            return invalid(format!("non-finite GIG parameters {self:?}"));
        }
        if lambda == 0.0 {
            return invalid("lambda = 0 is not supported");
        }
        if delta <= 0.0 {
            return invalid(format!("delta must be > 0, got {delta}"));
        }
        if gamma < 0.0 {
            return invalid(format!("gamma must be >= 0, got {gamma}"));
        }
        if gamma == 0.0 && lambda > 0.0 {
            return invalid("gamma = 0 requires lambda < 0");
        }
        Ok(())
    }

    /// |λ|, the Bessel order that shapes the Lévy density.
    pub fn nu(&self) -> f64 {
        self.lambda.abs()
    }
}

/// GH process parameters: jumps w = μ + βx + σ√x u for GIG jumps x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhParams {
    pub gig: GigParams,
    pub mu: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl GhParams {
    pub fn new(gig: GigParams, mu: f64, beta: f64, sigma: f64) -> Result<Self> {
        let p = Self { gig, mu, beta, sigma };
        p.validate()?;
        Ok(p)
    }

    /// From the (λ, α, β, δ, μ) form with σ = 1, so γ = sqrt(α² - β²).
    pub fn from_alpha(lambda: f64, alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        if !(alpha >= beta.abs()) {
            return invalid(format!("need alpha >= |beta|, got alpha={alpha}, beta={beta}"));
        }
        let gamma = ((alpha - beta.abs()) * (alpha + beta.abs())).sqrt();
        Self::new(GigParams::new(lambda, delta, gamma)?, mu, beta, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.gig.validate()?;
        if !(self.mu.is_finite() && self.beta.is_finite()) {
            return invalid("mu and beta must be finite");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("sigma must be > 0, got {}", self.sigma));
        }
        Ok(())
    }

    /// α of the unit-σ form, sqrt(γ² + (β/σ)²).
    pub fn alpha(&self) -> f64 {
        self.gig.gamma.hypot(self.beta / self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_gig() {
        assert!(GigParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GigParams::new(-1.0, 0.0, 1.0).is_err());
        assert!(GigParams::new(-1.0, 1.0, -0.1).is_err());
        assert!(GigParams::new(1.0, 1.0, 0.0).is_err());
        assert!(GigParams::new(-1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn alpha_round_trip() {
        let p = GhParams::from_alpha(-0.8, 2.0, 1.2, 1.0, 0.0).unwrap();
        assert!((p.gig.gamma - 1.6).abs() < 1e-15);
        assert!((p.alpha() - 2.0).abs() < 1e-15);
        assert!(GhParams::from_alpha(-0.8, 1.0, 1.2, 1.0, 0.0).is_err());
    }
}
