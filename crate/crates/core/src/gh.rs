//! GH process paths from GIG jumps by normal variance-mean mixing.
//!
//! Each GIG jump x at time v becomes w = μ + βx + σ√x u, u ~ N(0, 1). The
//! truncated small jumps are replaced by a drift and an independent
//! Brownian motion whose moments come from the GIG residual lower bounds.
//! The Brownian part is drawn only when a path is evaluated on a grid.

use std::sync::Once;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::envelope::EnvelopeConfig;
use crate::error::{domain, invalid, Result};
use crate::gig::{ComponentReport, GigSampler};
use crate::params::GhParams;
use crate::point_process::{assign_times, JumpRecord, JumpSet};
use crate::truncation::{gh_residual_moments, TruncationConfig};

static MU_WARNING: Once = Once::new();

/// Maps GIG jumps to GH jumps, keeping their times.
pub fn gh_jumps_from_gig<R: Rng + ?Sized>(gig: &JumpSet, p: &GhParams, rng: &mut R) -> Result<JumpSet> {
    p.validate()?;
    let records = gig
        .records
        .iter()
        .map(|r| {
            if !(r.size >= 0.0) {
                return domain(format!("GIG jump sizes must be >= 0, got {}", r.size));
            }
            let u: f64 = rng.sample(StandardNormal);
            Ok(JumpRecord { time: r.time, size: p.mu + p.beta * r.size + p.sigma * r.size.sqrt() * u })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JumpSet { records })
}

/// One simulated GH path over [0, T].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhPath {
    /// GH jumps with their arrival times.
    pub jumps: JumpSet,
    /// The underlying GIG jumps, same order and times as `jumps`.
    pub gig_jumps: JumpSet,
    /// Residual drift over the full horizon.
    pub residual_drift: f64,
    /// Residual variance over the full horizon.
    pub residual_var: f64,
    pub horizon: f64,
    pub components: Vec<ComponentReport>,
}

impl GhPath {
    /// Path values on an increasing grid in [0, T]: jump sum up to each t,
    /// plus drift t/T and a Brownian term with variance residual_var·Δt/T
    /// per cell.
    pub fn evaluate<R: Rng + ?Sized>(&self, grid: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if grid.iter().any(|t| !(0.0..=self.horizon).contains(t)) {
            return domain(format!("grid points must lie in [0, {}]", self.horizon));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return domain("grid must be nondecreasing");
        }
        let mut jumps: Vec<&JumpRecord> = self.jumps.records.iter().collect();
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        let scale = (self.residual_var / self.horizon).sqrt();
        let (mut k, mut sum, mut bm, mut prev) = (0usize, 0.0, 0.0, 0.0);
        let mut out = Vec::with_capacity(grid.len());
        for &t in grid {
            while k < jumps.len() && jumps[k].time <= t {
                sum += jumps[k].size;
                k += 1;
            }
            if scale > 0.0 && t > prev {
                let n: f64 = rng.sample(StandardNormal);
                bm += scale * (t - prev).sqrt() * n;
            }
            prev = t;
            out.push(sum + self.residual_drift * t / self.horizon + bm);
        }
        Ok(out)
    }

    /// W(T).
    pub fn endpoint<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        self.jumps.total() + self.residual_drift + self.residual_var.sqrt() * n
    }
}

/// Reusable simulator for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct GhSimulator {
    pub params: GhParams,
    pub truncation: TruncationConfig,
    pub horizon: f64,
    gig: GigSampler,
}

impl GhSimulator {
    pub fn new(p: &GhParams, tc: &TruncationConfig, cfg: &EnvelopeConfig, horizon: f64) -> Result<Self> {
        p.validate()?;
        tc.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return invalid(format!("horizon must be finite and > 0, got {horizon}"));
        }
        if p.mu != 0.0 {
            MU_WARNING.call_once(|| {
                log::warn!("mu = {} is added to every jump, not used as a location shift", p.mu);
            });
        }
        let beta0 = (!tc.optimize_beta0).then_some(tc.beta0);
        Ok(Self { params: *p, truncation: tc.clone(), horizon, gig: GigSampler::new(&p.gig, cfg, beta0)? })
    }

    pub fn gig_sampler(&self) -> &GigSampler {
        &self.gig
    }

    pub fn path(&self, rng: &mut dyn RngCore) -> Result<GhPath> {
        let s = self.gig.sample(&self.truncation, rng)?;
        let gig_jumps = assign_times(&s.sizes, self.horizon, rng)?;
        let jumps = gh_jumps_from_gig(&gig_jumps, &self.params, rng)?;
        let (mu, var) = gh_residual_moments(&s.residual, self.params.beta, self.params.sigma, self.horizon, self.horizon)?;
        Ok(GhPath {
            jumps,
            gig_jumps,
            residual_drift: if self.truncation.mean_adjust { mu } else { 0.0 },
            residual_var: if self.truncation.gaussian_residual { var } else { 0.0 },
            horizon: self.horizon,
            components: s.components,
        })
    }
}

/// Simulates one GH path over [0, T].
pub fn simulate_gh_path<R: RngCore>(
    p: &GhParams,
    tc: &TruncationConfig,
    cfg: &EnvelopeConfig,
    horizon: f64,
    rng: &mut R,
) -> Result<GhPath> {
    GhSimulator::new(p, tc, cfg, horizon)?.path(rng)
}
