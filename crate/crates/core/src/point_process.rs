//! Shot-noise building blocks: Poisson epochs, inverse tail maps and the
//! gamma / tempered-stable jump samplers obtained from them by thinning.
//!
//! A process with Lévy density Q and tail mass Q⁺(x) = ∫_x^∞ Q has its jumps
//! in (lo, hi] at h(Γ) for unit-rate epochs Γ in [Q⁺(hi), Q⁺(lo)), where
//! h = (Q⁺)⁻¹. Gamma and tempered-stable processes are simulated from a
//! simpler dominating density and thinned.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{invalid, Result};

/// A jump-magnitude range (lo, hi] with 0 <= lo < hi <= ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) || lo.is_infinite() {
            return invalid(format!("need 0 <= lo < hi, got ({lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    /// (lo, ∞).
    pub fn above(lo: f64) -> Result<Self> {
        Self::new(lo, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

/// Proposal and acceptance counts of one thinning stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub proposed: u64,
    pub accepted: u64,
}

impl StageCounts {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn merge(&mut self, other: &StageCounts) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }
}

/// A jump at a time in [0, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

/// Jumps of one path, in the order they were generated.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JumpSet {
    pub records: Vec<JumpRecord>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.records.iter().map(|r| r.size).sum()
    }
}

/// Unit-rate Poisson epochs in [lo, hi), ascending.
pub fn epochs_in_range<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
        return invalid(format!("epoch range must be finite with 0 <= lo <= hi, got [{lo}, {hi})"));
    }
    let mean = hi - lo;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let n = Poisson::new(mean)
        .map_err(|e| crate::Error::InvalidParams(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut out: Vec<f64> = (0..n).map(|_| lo + mean * rng.random::<f64>()).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Inverse tail of the stable density C x^{-1-α}: (αΓ/C)^{-1/α}.
pub fn ts_inverse_tail(c: f64, alpha: f64, epoch: f64) -> f64 {
    (alpha * epoch / c).powf(-1.0 / alpha)
}

/// Inverse tail of the gamma dominating density C / (x (1 + βx)):
/// 1 / (β (exp(Γ/C) - 1)).
pub fn gamma_inverse_tail(c: f64, beta: f64, epoch: f64) -> f64 {
    1.0 / (beta * (epoch / c).exp_m1())
}

/// Tail mass (C/α) x^{-α} of the stable density C x^{-1-α}.
pub fn stable_tail(c: f64, alpha: f64, x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        c / alpha * x.powf(-alpha)
    }
}

/// Tail mass C ln(1 + 1/(βx)) of the gamma dominating density.
pub fn gamma_dominating_tail(c: f64, beta: f64, x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        c * (1.0 / (beta * x)).ln_1p()
    }
}

fn check_finite_activity(iv: &Interval) -> Result<()> {
    if iv.lo <= 0.0 {
        return invalid("infinite-activity process needs a strictly positive lower cut-off");
    }
    Ok(())
}

/// Jumps in `iv` of the tempered-stable process with Lévy density
/// C x^{-1-α} e^{-βx}, largest first. β = 0 gives the stable process.
pub fn sample_tempered_stable<R: Rng + ?Sized>(
    c: f64,
    alpha: f64,
    beta: f64,
    iv: Interval,
    rng: &mut R,
) -> Result<Vec<f64>> {
    sample_tempered_stable_counted(c, alpha, beta, iv, rng, &mut StageCounts::default())
}

/// [`sample_tempered_stable`] recording the tempering step in `counts`.
pub fn sample_tempered_stable_counted<R: Rng + ?Sized>(
    c: f64,
    alpha: f64,
    beta: f64,
    iv: Interval,
    rng: &mut R,
    counts: &mut StageCounts,
) -> Result<Vec<f64>> {
    if !(c > 0.0 && alpha > 0.0 && alpha < 1.0 && beta >= 0.0) {
        return invalid(format!("tempered stable needs C > 0, 0 < α < 1, β >= 0; got {c}, {alpha}, {beta}"));
    }
    check_finite_activity(&iv)?;
    let epochs = epochs_in_range(stable_tail(c, alpha, iv.hi), stable_tail(c, alpha, iv.lo), rng)?;
    let mut out = Vec::with_capacity(epochs.len());
    for g in epochs {
        let x = ts_inverse_tail(c, alpha, g);
        if !iv.contains(x) {
            continue;
        }
        counts.proposed += 1;
        if beta == 0.0 || rng.random::<f64>() < (-beta * x).exp() {
            counts.accepted += 1;
            out.push(x);
        }
    }
    Ok(out)
}

/// Jumps in `iv` of the gamma process with Lévy density C e^{-βx}/x,
/// largest first.
pub fn sample_gamma_process<R: Rng + ?Sized>(c: f64, beta: f64, iv: Interval, rng: &mut R) -> Result<Vec<f64>> {
    sample_gamma_process_counted(c, beta, iv, rng, &mut StageCounts::default())
}

/// [`sample_gamma_process`] recording the thinning step in `counts`.
pub fn sample_gamma_process_counted<R: Rng + ?Sized>(
    c: f64,
    beta: f64,
    iv: Interval,
    rng: &mut R,
    counts: &mut StageCounts,
) -> Result<Vec<f64>> {
    if !(c > 0.0 && beta > 0.0) {
        return invalid(format!("gamma process needs C, β > 0; got {c}, {beta}"));
    }
    check_finite_activity(&iv)?;
    let epochs = epochs_in_range(
        gamma_dominating_tail(c, beta, iv.hi),
        gamma_dominating_tail(c, beta, iv.lo),
        rng,
    )?;
    let mut out = Vec::with_capacity(epochs.len());
    for g in epochs {
        let x = gamma_inverse_tail(c, beta, g);
        if !iv.contains(x) {
            continue;
        }
        counts.proposed += 1;
        let bx = beta * x;
        if rng.random::<f64>() < (1.0 + bx) * (-bx).exp() {
            counts.accepted += 1;
            out.push(x);
        }
    }
    Ok(out)
}

/// Attaches i.i.d. U(0, T) times to jump sizes.
pub fn assign_times<R: Rng + ?Sized>(sizes: &[f64], horizon: f64, rng: &mut R) -> Result<JumpSet> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be finite and > 0, got {horizon}"));
    }
    let records = sizes
        .iter()
        .map(|&size| JumpRecord { time: horizon * rng.random::<f64>(), size })
        .collect();
    Ok(JumpSet { records })
}
