//! Residual moments of truncated series, Chebyshev exceedance bounds and the
//! adaptive multi-component truncation loop.
//!
//! Jumps below ε are not simulated. The omitted sum R^ε over [0, T] has mean
//! ∫_0^ε x Q(x) dx and variance ∫_0^ε x² Q(x) dx. For gamma and tempered
//! stable densities these are incomplete gamma functions; for the GIG density
//! they are bracketed by the moments of dominating (upper) and dominated
//! (lower) gamma / tempered-stable densities.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::envelope::EnvelopeConfig;
use crate::error::{invalid, Error, Result};
use crate::gig::GigSampler;
use crate::params::GigParams;
use crate::point_process::Interval;
use crate::specfun::lower_scaled_raw;

/// Dominating or dominated Lévy density with closed-form residual moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// C e^{-βx} / x.
    Gamma { c: f64, beta: f64 },
    /// C x^{-1-α} e^{-βx}; β = 0 is the stable density.
    TemperedStable { c: f64, alpha: f64, beta: f64 },
}

impl Family {
    pub fn stable(c: f64, alpha: f64) -> Self {
        Family::TemperedStable { c, alpha, beta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Gamma { c, beta } if c > 0.0 && beta > 0.0 => Ok(()),
            Family::TemperedStable { c, alpha, beta } if c > 0.0 && alpha > 0.0 && alpha < 1.0 && beta >= 0.0 => Ok(()),
            f => invalid(format!("bad family parameters {f:?}")),
        }
    }

    /// (∫_0^ε x Q, ∫_0^ε x² Q) over the full horizon.
    ///
    /// Written with γ(s, y)/y^s so that β = 0 needs no special case.
    pub fn residual(&self, eps: f64) -> (f64, f64) {
        if eps <= 0.0 {
            return (0.0, 0.0);
        }
        match *self {
            Family::Gamma { c, beta } => {
                let y = beta * eps;
                if y.is_infinite() {
                    return (c / beta, c / (beta * beta));
                }
                (c * eps * lower_scaled_raw(1.0, y), c * eps * eps * lower_scaled_raw(2.0, y))
            }
            Family::TemperedStable { c, alpha, beta } => {
                let y = beta * eps;
                (
                    c * eps.powf(1.0 - alpha) * lower_scaled_raw(1.0 - alpha, y),
                    c * eps.powf(2.0 - alpha) * lower_scaled_raw(2.0 - alpha, y),
                )
            }
        }
    }
}

/// Closed-form residual (mean, variance) of a gamma, tempered-stable or
/// stable process truncated at ε, over [0, t] out of a horizon T.
pub fn family_residual_moments(family: Family, eps: f64, t: f64, horizon: f64) -> Result<(f64, f64)> {
    family.validate()?;
    if !(eps > 0.0) {
        return invalid(format!("truncation level must be > 0, got {eps}"));
    }
    check_time(t, horizon)?;
    let (m, v) = family.residual(eps);
    let s = t / horizon;
    Ok((s * m, s * v))
}

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite() && (0.0..=horizon).contains(&t)) {
        return invalid(format!("need 0 <= t <= T, T > 0; got t = {t}, T = {horizon}"));
    }
    Ok(())
}

/// Upper and lower bounds on the residual mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualMoments {
    pub mean_upper: f64,
    pub var_upper: f64,
    pub mean_lower: f64,
    pub var_lower: f64,
}

impl ResidualMoments {
    pub fn exact(mean: f64, var: f64) -> Self {
        Self { mean_upper: mean, var_upper: var, mean_lower: mean, var_lower: var }
    }

    pub fn add(&mut self, o: &ResidualMoments) {
        self.mean_upper += o.mean_upper;
        self.var_upper += o.var_upper;
        self.mean_lower += o.mean_lower;
        self.var_lower += o.var_lower;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mean_upper: s * self.mean_upper,
            var_upper: s * self.var_upper,
            mean_lower: s * self.mean_lower,
            var_lower: s * self.var_lower,
        }
    }
}

/// Chebyshev bound on Pr(R^ε >= E) from upper moments, or the mean-adjusted
/// bound σ̄² / (E + μ_ - μ̄)² when `mean_adjust` is set. Returns 1 when the
/// denominator is not positive.
pub fn exceedance_bound(e: f64, m: &ResidualMoments, mean_adjust: bool) -> f64 {
    let gap = if mean_adjust { e + m.mean_lower - m.mean_upper } else { e - m.mean_upper };
    if !(gap > 0.0) {
        return 1.0;
    }
    (m.var_upper / (gap * gap)).clamp(0.0, 1.0)
}

/// Decreasing truncation levels ε1 > ε2 > ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EpsSchedule {
    /// ε_n = first · ratio^{n-1}, n = 1..=max_levels.
    Geometric { first: f64, ratio: f64, max_levels: usize },
    Explicit { levels: Vec<f64> },
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule::Geometric { first: 1.0, ratio: 0.5, max_levels: 200 }
    }
}

impl EpsSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            EpsSchedule::Geometric { first, ratio, max_levels } => {
                if !(*first > 0.0 && first.is_finite() && *ratio > 0.0 && *ratio < 1.0 && *max_levels > 0) {
                    return invalid(format!("bad geometric schedule {self:?}"));
                }
            }
            EpsSchedule::Explicit { levels } => {
                if levels.is_empty() || levels.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    return invalid("explicit schedule must be nonempty with finite positive levels");
                }
                if levels.windows(2).any(|w| w[1] >= w[0]) {
                    return invalid("explicit schedule must be strictly decreasing");
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            EpsSchedule::Geometric { max_levels, .. } => *max_levels,
            EpsSchedule::Explicit { levels } => levels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// ε_{n+1} (zero-based), or None past the end.
    pub fn level(&self, n: usize) -> Option<f64> {
        match self {
            EpsSchedule::Geometric { first, ratio, max_levels } => {
                (n < *max_levels).then(|| first * ratio.powi(n as i32))
            }
            EpsSchedule::Explicit { levels } => levels.get(n).copied(),
        }
    }
}

/// Adaptive truncation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    /// Residual tolerance relative to the accumulated sum.
    pub tau: f64,
    /// Exceedance probability target.
    pub p_t: f64,
    pub schedule: EpsSchedule,
    /// Free parameter (> 1) of the tempered-stable lower bound.
    pub beta0: f64,
    /// Maximise the lower bound over β0 in (1, 50] at each ε instead.
    pub optimize_beta0: bool,
    /// Use the mean-adjusted exceedance bound and add the lower residual
    /// mean as drift.
    pub mean_adjust: bool,
    /// Add the Brownian residual term when evaluating paths.
    pub gaussian_residual: bool,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            tau: 0.01,
            p_t: 0.05,
            schedule: EpsSchedule::default(),
            beta0: 2.0,
            optimize_beta0: false,
            mean_adjust: true,
            gaussian_residual: true,
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return invalid(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.p_t > 0.0 && self.p_t < 1.0) {
            return invalid(format!("p_T must lie in (0, 1), got {}", self.p_t));
        }
        if !(self.beta0 > 1.0 && self.beta0.is_finite()) {
            return invalid(format!("beta0 must be finite and > 1, got {}", self.beta0));
        }
        self.schedule.validate()
    }
}

/// One independently truncated piece of a Lévy density.
pub trait TruncatedComponent {
    fn label(&self) -> &'static str;
    /// Jump sizes in `iv`.
    fn sample_slice(&mut self, iv: Interval, rng: &mut dyn RngCore) -> Result<Vec<f64>>;
    /// Residual moment bounds at truncation level ε over the full horizon.
    fn residual(&self, eps: f64) -> ResidualMoments;
}

/// Where and why one component stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentStop {
    pub label: &'static str,
    pub eps_final: f64,
    /// Number of slices simulated, the mandatory (ε1, ∞) one included.
    pub slices: usize,
    pub residual: ResidualMoments,
    pub exceedance: f64,
}

/// Output of [`adaptive_sample`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveOutcome {
    pub sizes: Vec<f64>,
    pub stops: Vec<ComponentStop>,
    /// Sum of per-component residual bounds, each at its own ε.
    pub residual: ResidualMoments,
    /// Accumulated sum used as E / τ at the end.
    pub accumulated: f64,
}

/// Adaptive truncation over several independent components.
///
/// Every component is simulated on (ε1, ∞). Then, level by level, each
/// active component checks its exceedance bound at threshold τ·E, with E the
/// sum accumulated so far over all components (plus `initial_sum`), and
/// stops at the first ε_n where the bound is <= p_T; otherwise it simulates
/// (ε_{n+1}, ε_n] and E grows.
pub fn adaptive_sample(
    components: &mut [&mut dyn TruncatedComponent],
    tc: &TruncationConfig,
    initial_sum: f64,
    rng: &mut dyn RngCore,
) -> Result<AdaptiveOutcome> {
    tc.validate()?;
    let eps1 = tc.schedule.level(0).expect("validated schedule is nonempty");
    let mut sizes = Vec::new();
    let mut e_sum = initial_sum;
    let mut slices = vec![1usize; components.len()];
    for c in components.iter_mut() {
        let s = c.sample_slice(Interval::above(eps1)?, rng)?;
        e_sum += s.iter().sum::<f64>();
        sizes.extend(s);
    }
    let mut stops: Vec<Option<ComponentStop>> = vec![None; components.len()];
    let mut n = 0usize;
    loop {
        let eps = tc.schedule.level(n).expect("level checked before use");
        let mut pending = 0usize;
        for (k, c) in components.iter_mut().enumerate() {
            if stops[k].is_some() {
                continue;
            }
            let m = c.residual(eps);
            let bound = exceedance_bound(tc.tau * e_sum, &m, tc.mean_adjust);
            if bound <= tc.p_t {
                stops[k] = Some(ComponentStop { label: c.label(), eps_final: eps, slices: slices[k], residual: m, exceedance: bound });
                continue;
            }
            let Some(next) = tc.schedule.level(n + 1) else {
                pending += 1;
                continue;
            };
            let s = c.sample_slice(Interval::new(next, eps)?, rng)?;
            e_sum += s.iter().sum::<f64>();
            sizes.extend(s);
            slices[k] += 1;
            pending += 1;
        }
        if pending == 0 {
            break;
        }
        if tc.schedule.level(n + 1).is_none() {
            return Err(Error::ScheduleExhausted { levels: n + 1, pending });
        }
        n += 1;
    }
    let stops: Vec<ComponentStop> = stops.into_iter().map(|s| s.expect("all components stopped")).collect();
    let mut residual = ResidualMoments::default();
    for s in &stops {
        residual.add(&s.residual);
    }
    Ok(AdaptiveOutcome { sizes, stops, residual, accumulated: e_sum - initial_sum })
}

/// Residual bounds of the GIG density at a common ε over [0, t] of [0, T].
/// `beta0` fixes the tempered-stable lower-bound parameter; None optimises it.
pub fn gig_residual_bounds(
    p: &GigParams,
    cfg: &EnvelopeConfig,
    eps: f64,
    t: f64,
    horizon: f64,
    beta0: Option<f64>,
) -> Result<ResidualMoments> {
    if !(eps > 0.0) {
        return invalid(format!("truncation level must be > 0, got {eps}"));
    }
    check_time(t, horizon)?;
    Ok(GigSampler::new(p, cfg, beta0)?.residual_bounds(eps).scaled(t / horizon))
}

/// Upper (mean, variance) bounds from the dominating densities.
pub fn gig_residual_upper(p: &GigParams, cfg: &EnvelopeConfig, eps: f64, t: f64, horizon: f64) -> Result<(f64, f64)> {
    let m = gig_residual_bounds(p, cfg, eps, t, horizon, Some(2.0))?;
    Ok((m.mean_upper, m.var_upper))
}

/// Lower (mean, variance) bounds; `beta0` must exceed 1.
pub fn gig_residual_lower(
    p: &GigParams,
    cfg: &EnvelopeConfig,
    eps: f64,
    t: f64,
    horizon: f64,
    beta0: f64,
) -> Result<(f64, f64)> {
    let m = gig_residual_bounds(p, cfg, eps, t, horizon, Some(beta0))?;
    Ok((m.mean_lower, m.var_lower))
}

/// GH residual (mean, variance) over [0, t] from GIG lower moments:
/// ((t/T) β μ_, (t/T)(β² σ²_ + σ² μ_)).
pub fn gh_residual_moments(gig: &ResidualMoments, beta: f64, sigma: f64, t: f64, horizon: f64) -> Result<(f64, f64)> {
    check_time(t, horizon)?;
    if !(sigma >= 0.0) {
        return invalid(format!("sigma must be >= 0, got {sigma}"));
    }
    let s = t / horizon;
    Ok((s * beta * gig.mean_lower, s * (beta * beta * gig.var_lower + sigma * sigma * gig.mean_lower)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let (m, _) = family_residual_moments(Family::Gamma { c: 1.0, beta: 1.0 }, 1e6, 1.0, 1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let (m, v) = family_residual_moments(Family::stable(1.0, 0.5), 0.25, 1.0, 1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        assert!((v - 0.25f64.powf(1.5) / 1.5).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_cases() {
        let m = ResidualMoments { mean_upper: 1.0, var_upper: 4.0, mean_lower: 0.5, var_lower: 1.0 };
        assert!((exceedance_bound(1.0 + 3.0 * 2.0, &m, false) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(exceedance_bound(1.0 + 2.0, &m, false), 1.0);
        assert_eq!(exceedance_bound(0.5, &m, false), 1.0);
        assert!(exceedance_bound(7.0, &m, true) < exceedance_bound(7.0, &m, false));
        let none = ResidualMoments { mean_lower: 0.0, ..m };
        assert_eq!(exceedance_bound(7.0, &none, true), exceedance_bound(7.0, &none, false));
    }

    #[test]
    fn gh_mapping_arithmetic() {
        let g = ResidualMoments { mean_upper: 1.0, var_upper: 1.0, mean_lower: 0.3, var_lower: 0.1 };
        let (m, v) = gh_residual_moments(&g, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((m - 0.6).abs() < 1e-15 && (v - 0.7).abs() < 1e-15);
        let (m, v) = gh_residual_moments(&g, 0.0, 1.5, 0.5, 1.0).unwrap();
        assert_eq!(m, 0.0);
        assert!((v - 0.5 * 2.25 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsSchedule::Explicit { levels: vec![1.0, 1.0] }.validate().is_err());
        assert!(EpsSchedule::Geometric { first: 1.0, ratio: 1.0, max_levels: 3 }.validate().is_err());
        let s = EpsSchedule::Geometric { first: 2.0, ratio: 0.25, max_levels: 3 };
        assert_eq!(s.level(2), Some(0.125));
        assert_eq!(s.level(3), None);
    }
}
