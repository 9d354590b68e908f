//! Bounds on z|H_ν(z)|² and the GIG Lévy-density envelopes built from them.
//!
//! The GIG Lévy density is the z-marginal of
//!
//! Q_GIG(x, z) = 2 e^{-xγ²/2} / (π² x) · e^{-z²x/(2δ²)} / (z |H_ν(z)|²),
//!
//! plus λ e^{-xγ²/2} / x when λ > 0. Two piecewise power laws bracket the
//! scaled modulus z|H_ν(z)|²:
//!
//! A(z) = (2/π) (z1/z)^{2ν-1} below z1, 2/π above;
//! B(z) = H0 (z0/z)^{2ν-1} below z0, H0 above, with H0 = z0 |H_ν(z0)|².
//!
//! For ν >= 1/2, A <= z|H|² <= B; for ν <= 1/2 the order flips. Substituting
//! the bound that under-estimates z|H|² gives a dominating envelope (regime
//! A for ν >= 1/2, regime B for ν < 1/2); the other gives a lower envelope.
//! Each envelope splits at its breakpoint into N1 (small z) and N2 (large z).

use std::f64::consts::{FRAC_2_PI, PI};

use libm::lgamma as ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::params::GigParams;
use crate::quad::integrate_log;
use crate::specfun::{ln_lower_raw, ln_scaled_hankel_sq_raw, ln_upper_raw, lower_scaled_raw};

/// Which bound dominates z|H_ν(z)|² from below and therefore gives the
/// sampling envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// ν >= 1/2: envelope from A(z), breakpoint z1.
    A,
    /// ν < 1/2: envelope from B(z), breakpoint z0.
    B,
}

impl Regime {
    pub fn for_order(nu: f64) -> Self {
        if nu >= 0.5 {
            Regime::A
        } else {
            Regime::B
        }
    }
}

/// Small-z and large-z halves of an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    N1,
    N2,
}

/// Breakpoints and squeeze switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConfig {
    /// Breakpoint of A(z); 0 recovers the single-piece envelope.
    pub z1: f64,
    /// Breakpoint of B(z).
    pub z0: f64,
    /// Accept early, without drawing z, when a uniform falls under the
    /// constant lower bound of the thinning ratio. Needs z0 == z1.
    pub squeeze: bool,
}

impl EnvelopeConfig {
    /// z1 = z0 = z1_max(|λ|), squeeze on. With γ = 0 and |λ| > 1/2 the
    /// small-z piece has no tempering, so z1 drops to 0 and the squeeze is
    /// off. At |λ| = 1/2 no bound is needed; z0 = 1 is a placeholder.
    pub fn for_params(p: &GigParams) -> Self {
        let nu = p.nu();
        if nu == 0.5 {
            return Self { z1: 0.0, z0: 1.0, squeeze: false };
        }
        let zmax = z1_max(nu).expect("ν > 0 and ν != 1/2");
        if p.gamma == 0.0 && nu > 0.5 {
            return Self { z1: 0.0, z0: zmax, squeeze: false };
        }
        Self { z1: zmax, z0: zmax, squeeze: true }
    }

    pub fn validate(&self, p: &GigParams) -> Result<()> {
        let nu = p.nu();
        if !(self.z1 >= 0.0 && self.z1.is_finite()) {
            return invalid(format!("z1 must be finite and >= 0, got {}", self.z1));
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return invalid(format!("z0 must be finite and > 0, got {}", self.z0));
        }
        if nu != 0.5 {
            let zmax = z1_max(nu)?;
            if self.z1 > zmax * (1.0 + 1e-12) {
                return invalid(format!("z1 = {} exceeds z1_max({nu}) = {zmax}", self.z1));
            }
            if nu < 0.5 && self.z0 > zmax * (1.0 + 1e-12) && self.squeeze {
                return invalid("squeeze with ν < 1/2 needs z0 <= z1_max");
            }
        }
        if self.squeeze && nu != 0.5 && self.z0 != self.z1 {
            return invalid("squeeze needs z0 == z1");
        }
        Ok(())
    }
}

/// Largest z1 for which A(z) stays on its side of z|H_ν(z)|²:
/// (2^{1-2ν} π / Γ(ν)²)^{1/(1-2ν)}.
pub fn z1_max(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return domain(format!("z1_max needs ν > 0, got {nu}"));
    }
    if nu == 0.5 {
        return Err(crate::Error::Singular("z1_max"));
    }
    let e = 1.0 - 2.0 * nu;
    Ok(((e * std::f64::consts::LN_2 + PI.ln() - 2.0 * ln_gamma(nu)) / e).exp())
}

/// A(z) = (2/π)(z1/z)^{2ν-1} for z < z1, 2/π otherwise.
pub fn bound_a(z: f64, nu: f64, z1: f64) -> f64 {
    if z < z1 {
        FRAC_2_PI * (z1 / z).powf(2.0 * nu - 1.0)
    } else {
        FRAC_2_PI
    }
}

/// B(z) = H0 (z0/z)^{2ν-1} for z < z0, H0 otherwise.
pub fn bound_b(z: f64, nu: f64, z0: f64, h0: f64) -> f64 {
    if z < z0 {
        h0 * (z0 / z).powf(2.0 * nu - 1.0)
    } else {
        h0
    }
}

/// ln of Γ(ν)² 2^{2ν} / π², the limit of z^{2ν-1} · z|H_ν(z)|² at z → 0.
fn ln_small_z_limit(nu: f64) -> f64 {
    2.0 * ln_gamma(nu) + 2.0 * nu * std::f64::consts::LN_2 - 2.0 * PI.ln()
}

/// The bivariate GIG Lévy density Q_GIG(x, z), without the λ > 0 term.
pub fn q_gig_xz(x: f64, z: f64, p: &GigParams) -> f64 {
    let r = x / (2.0 * p.delta * p.delta);
    let ln = (2.0 / (PI * PI * x)).ln() - 0.5 * x * p.gamma * p.gamma - z * z * r - ln_scaled_hankel_sq_raw(p.nu(), z);
    ln.exp()
}

/// The GIG Lévy density Q_GIG(x), z integrated out by quadrature.
pub fn gig_levy_density(x: f64, p: &GigParams) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("Lévy density needs x > 0, got {x}"));
    }
    let nu = p.nu();
    let r = x / (2.0 * p.delta * p.delta);
    let zmax = (800.0 / r).sqrt();
    let zmin = (1e-200f64).min(zmax * 1e-100);
    let q = integrate_log(
        |z| (-z * z * r - ln_scaled_hankel_sq_raw(nu, z)).exp(),
        zmin,
        zmax,
        1e-11,
        0.0,
    )?;
    // ∫_0^zmin of the leading small-z form z^{2ν-1} / limit.
    let head = if nu > 0.0 { (2.0 * nu * zmin.ln() - ln_small_z_limit(nu)).exp() / (2.0 * nu) } else { 0.0 };
    let tilt = (-0.5 * x * p.gamma * p.gamma).exp();
    let mut v = 2.0 * tilt / (PI * PI * x) * (q.value + head);
    if p.lambda > 0.0 {
        v += p.lambda * tilt / x;
    }
    Ok(v)
}

/// Pre-computed envelope for one parameter set, used in the sampling loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub nu: f64,
    pub delta: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub z1: f64,
    pub z0: f64,
    /// z0 |H_ν(z0)|².
    pub h0: f64,
    /// Breakpoint of the sampling envelope (z1 in regime A, z0 in B).
    pub split: f64,
    /// Constant level of the sampling bound: 2/π in regime A, H0 in B.
    pub level: f64,
    /// Lower bound of the thinning ratio for the squeeze, if enabled.
    pub squeeze: Option<f64>,
}

impl Envelope {
    pub fn new(p: &GigParams, cfg: &EnvelopeConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate(p)?;
        let nu = p.nu();
        let regime = Regime::for_order(nu);
        let h0 = ln_scaled_hankel_sq_raw(nu, cfg.z0).exp();
        let (split, level) = match regime {
            Regime::A => (cfg.z1, FRAC_2_PI),
            Regime::B => (cfg.z0, h0),
        };
        let squeeze = if cfg.squeeze && cfg.z0 == cfg.z1 && cfg.z0 > 0.0 {
            // min over z of (sampling bound)/(other bound), constant when z0 == z1
            Some(match regime {
                Regime::A => FRAC_2_PI / h0,
                Regime::B => h0 / FRAC_2_PI,
            })
        } else {
            None
        };
        Ok(Self { nu, delta: p.delta, gamma: p.gamma, regime, z1: cfg.z1, z0: cfg.z0, h0, split, level, squeeze })
    }

    /// Rate of the conditional √Gamma law of z given x.
    pub fn z_rate(&self, x: f64) -> f64 {
        x / (2.0 * self.delta * self.delta)
    }

    /// Sampling bound at z (A(z) in regime A, B(z) in regime B).
    pub fn bound(&self, z: f64) -> f64 {
        if z < self.split {
            self.level * (self.split / z).powf(2.0 * self.nu - 1.0)
        } else {
            self.level
        }
    }

    /// Thinning ratio bound(z) / (z|H_ν(z)|²), in (0, 1].
    pub fn ratio(&self, z: f64) -> f64 {
        let ln = if z == 0.0 {
            self.level.ln() + (2.0 * self.nu - 1.0) * self.split.ln() - ln_small_z_limit(self.nu)
        } else {
            let shape = if z < self.split { (2.0 * self.nu - 1.0) * (self.split / z).ln() } else { 0.0 };
            self.level.ln() + shape - ln_scaled_hankel_sq_raw(self.nu, z)
        };
        ln.exp().min(1.0)
    }
}

/// Bivariate envelope Q^A (regime A) or Q^B (regime B) at (x, z).
pub fn envelope_xz(x: f64, z: f64, p: &GigParams, cfg: &EnvelopeConfig, regime: Regime) -> Result<f64> {
    let nu = p.nu();
    let r = x / (2.0 * p.delta * p.delta);
    let tilt = (-0.5 * x * p.gamma * p.gamma - z * z * r).exp();
    let bound = match regime {
        Regime::A => bound_a(z, nu, cfg.z1),
        Regime::B => bound_b(z, nu, cfg.z0, ln_scaled_hankel_sq_raw(nu, cfg.z0).exp()),
    };
    Ok(2.0 * tilt / (PI * PI * x * bound))
}

/// z-marginal of one half of an envelope, Q^{A|B}_{N1|N2}(x).
pub fn dominating_marginal(x: f64, p: &GigParams, cfg: &EnvelopeConfig, regime: Regime, part: Part) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("envelope marginal needs x > 0, got {x}"));
    }
    let nu = p.nu();
    let r = x / (2.0 * p.delta * p.delta);
    let tilt = (-0.5 * x * p.gamma * p.gamma).exp();
    let (split, scale) = match regime {
        // 1 / (π x) in front, relative to the 2/(π² x) of Q_GIG.
        Regime::A => (cfg.z1, 1.0 / (2.0 * PI)),
        Regime::B => (cfg.z0, 1.0 / (PI * PI * ln_scaled_hankel_sq_raw(nu, cfg.z0).exp())),
    };
    let y = split * split * r;
    Ok(match part {
        // scale · split · [γ(ν, y)/y^ν] / x
        Part::N1 => {
            if split == 0.0 {
                0.0
            } else {
                tilt * scale * split * lower_scaled_raw(nu, y) / x
            }
        }
        // scale · sqrt(2δ²) Γ(1/2, y) / x^{3/2}
        Part::N2 => tilt * scale * (2.0 * p.delta * p.delta).sqrt() * ln_upper_raw(0.5, y).exp() / x.powf(1.5),
    })
}

/// Hankel-stage thinning ratio for a z drawn in `part` of the envelope of
/// `regime`. Depends on z only.
pub fn thinning_ratio(z: f64, p: &GigParams, cfg: &EnvelopeConfig, regime: Regime, part: Part) -> Result<f64> {
    let e = Envelope::new(p, &EnvelopeConfig { squeeze: false, ..*cfg })?;
    if e.regime != regime && e.nu != 0.5 {
        return invalid(format!("regime {regime:?} does not give a dominating envelope at ν = {}", e.nu));
    }
    let split = match regime {
        Regime::A => cfg.z1,
        Regime::B => cfg.z0,
    };
    let e = Envelope { split, level: if regime == Regime::A { FRAC_2_PI } else { e.h0 }, ..e };
    let inside = match part {
        Part::N1 => z >= 0.0 && z < split,
        Part::N2 => z >= split && z.is_finite(),
    };
    if !inside {
        return domain(format!("z = {z} is outside the {part:?} support for breakpoint {split}"));
    }
    Ok(e.ratio(z))
}

fn ln_sub_exp(a: f64, b: f64) -> f64 {
    // ln(e^a - e^b) for a >= b
    if b == f64::NEG_INFINITY {
        a
    } else {
        a + (-(b - a).exp()).ln_1p()
    }
}

/// ln(γ(s, hi) - γ(s, lo)) for hi >= lo, from whichever tail is accurate.
fn ln_lower_diff(s: f64, lo: f64, hi: f64) -> f64 {
    if lo > s {
        ln_sub_exp(ln_upper_raw(s, lo), ln_upper_raw(s, hi))
    } else {
        ln_sub_exp(ln_lower_raw(s, hi), ln_lower_raw(s, lo))
    }
}

/// Lower bound on the expected Hankel-stage acceptance at jump size x, for
/// the regime-A sampler (ν >= 1/2) with breakpoint z1 bounded through B(z)
/// at breakpoint z0.
pub fn acceptance_lower_bound(x: f64, p: &GigParams, z0: f64, z1: f64, part: Part) -> Result<f64> {
    let nu = p.nu();
    if nu < 0.5 {
        return domain(format!("acceptance bound is for ν >= 1/2, got {nu}"));
    }
    if !(x > 0.0) || !(z0 > 0.0) || !(z1 >= 0.0) {
        return domain(format!("need x > 0, z0 > 0, z1 >= 0; got {x}, {z0}, {z1}"));
    }
    let h0 = ln_scaled_hankel_sq_raw(nu, z0).exp();
    let c = FRAC_2_PI / h0;
    let r = x / (2.0 * p.delta * p.delta);
    let (y0, y1) = (z0 * z0 * r, z1 * z1 * r);
    let e = 2.0 * nu - 1.0;
    let v = match part {
        Part::N1 => {
            if z1 == 0.0 {
                return Ok(0.0);
            }
            if z0 < z1 {
                let g1 = ln_lower_raw(nu, y1);
                let first = (e * (z1 / z0).ln() + ln_lower_raw(nu, y0) - g1).exp();
                let second = ((nu - 0.5) * y1.ln() + ln_lower_diff(0.5, y0, y1) - g1).exp();
                c * (first + second)
            } else {
                c * (z1 / z0).powf(e)
            }
        }
        Part::N2 => {
            if z0 < z1 {
                c
            } else {
                let g1 = ln_upper_raw(0.5, y1);
                let first = (ln_upper_raw(0.5, y0) - g1).exp();
                let second = if y0 > y1 {
                    ((0.5 - nu) * y0.ln() + ln_lower_diff(nu, y1, y0) - g1).exp()
                } else {
                    0.0
                };
                c * (first + second)
            }
        }
    };
    Ok(v.min(1.0))
}

/// Maximises [`acceptance_lower_bound`] over z0 by a log-spaced scan followed
/// by golden-section refinement (relative tolerance 1e-6 in z0). The search
/// covers [1e-3 s, 1e3 S] with s, S the smaller and larger of z1 and the
/// typical z-scale δ sqrt(2/x). Returns (z0, bound).
pub fn optimize_z0(x: f64, p: &GigParams, z1: f64, part: Part) -> Result<(f64, f64)> {
    let scale = p.delta * (2.0 / x).sqrt();
    let lo_anchor = if z1 > 0.0 { z1.min(scale) } else { scale };
    let hi_anchor = z1.max(scale);
    let (a, b) = ((1e-3 * lo_anchor).ln(), (1e3 * hi_anchor).ln());
    let f = |u: f64| acceptance_lower_bound(x, p, u.exp(), z1, part).unwrap_or(0.0);

    const GRID: usize = 121;
    let step = (b - a) / (GRID - 1) as f64;
    let mut best = (a, f(a));
    for i in 1..GRID {
        let u = a + step * i as f64;
        let v = f(u);
        if v > best.1 {
            best = (u, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(a), (best.0 + step).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-6 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    let (u, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(if v >= best.1 { (u.exp(), v) } else { (best.0.exp(), best.1) })
}
