//! Truncated square-root gamma variates.
//!
//! A √Ga(shape, rate) variate z has density 2 rate^shape / Γ(shape)
//! z^{2 shape - 1} e^{-rate z²}, i.e. z² ~ Gamma(shape, rate). Truncation
//! acts on z; internally everything is mapped to y = rate z² ~ Gamma(shape, 1).

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use libm::lgamma as ln_gamma;

use super::incgamma::{ln_lower_raw, ln_upper_raw};
use crate::error::{domain, Error, Result};

/// Normalising masses below this are reported as an underflow.
pub const MIN_TRUNCATION_MASS: f64 = 1e-300;

/// Which part of the half-line the variate is restricted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// No restriction.
    Full,
    /// z in (0, bound).
    Right(f64),
    /// z in [bound, ∞).
    Left(f64),
}

/// Draws z ~ √Ga(shape, rate) restricted by `trunc`.
///
/// Inverse CDF by safeguarded Newton iteration on the incomplete gamma
/// function, or plain rejection from the untruncated law once the retained
/// mass exceeds one half. Fails if the retained mass is below
/// [`MIN_TRUNCATION_MASS`].
pub fn sample_sqrt_gamma_truncated<R: Rng + ?Sized>(
    shape: f64,
    rate: f64,
    trunc: Truncation,
    rng: &mut R,
) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
        return domain(format!("sqrt-gamma needs shape, rate > 0; got {shape}, {rate}"));
    }
    let ln_mass = match trunc {
        Truncation::Full => 0.0,
        Truncation::Right(b) | Truncation::Left(b) if b.is_nan() || b < 0.0 => {
            return domain(format!("truncation bound must be >= 0, got {b}"));
        }
        Truncation::Right(b) => ln_lower_raw(shape, rate * b * b) - ln_gamma(shape),
        Truncation::Left(b) => ln_upper_raw(shape, rate * b * b) - ln_gamma(shape),
    };
    if ln_mass < MIN_TRUNCATION_MASS.ln() {
        return Err(Error::TruncationMassUnderflow { mass: ln_mass.exp() });
    }
    Ok(draw(shape, rate, trunc, rng))
}

/// Same law without the mass check; works in log space throughout.
pub(crate) fn draw<R: Rng + ?Sized>(shape: f64, rate: f64, trunc: Truncation, rng: &mut R) -> f64 {
    let y = match trunc {
        Truncation::Full => gamma_unit(shape, rng),
        Truncation::Right(b) => draw_below(shape, rate * b * b, rng),
        Truncation::Left(b) => draw_above(shape, rate * b * b, rng),
    };
    (y / rate).sqrt()
}

fn gamma_unit<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("shape checked positive").sample(rng)
}

fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// y ~ Gamma(s, 1) conditioned on y < c.
fn draw_below<R: Rng + ?Sized>(s: f64, c: f64, rng: &mut R) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let lg = ln_gamma(s);
    let ln_mass = ln_lower_raw(s, c);
    if ln_mass - lg > -std::f64::consts::LN_2 {
        loop {
            let y = gamma_unit(s, rng);
            if y < c {
                return y;
            }
        }
    }
    let target = uniform_open(rng).ln() + ln_mass;
    // Solve ln γ(s, e^t) = target for t <= ln c. On the left ln γ is close
    // to s t - ln s, which gives a starting point and keeps Newton stable.
    let hi = c.ln();
    let mut lo = f64::NEG_INFINITY;
    let mut up = hi;
    let mut t = ((target + s.ln()) / s).min(hi);
    for _ in 0..200 {
        let y = t.exp();
        let g = ln_lower_raw(s, y);
        let resid = g - target;
        if resid > 0.0 {
            up = t;
        } else {
            lo = t;
        }
        // d/dt ln γ(s, e^t) = y^s e^{-y} / γ(s, y)
        let slope = (s * t - y - g).exp();
        let mut next = t - resid / slope;
        if !(next > lo && next < up) || !next.is_finite() {
            next = if lo.is_finite() { 0.5 * (lo + up) } else { up - 2.0 * (up - t).max(1.0) };
        }
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            t = next;
            break;
        }
        t = next;
    }
    t.exp().min(c)
}

/// y ~ Gamma(s, 1) conditioned on y >= c.
fn draw_above<R: Rng + ?Sized>(s: f64, c: f64, rng: &mut R) -> f64 {
    let lg = ln_gamma(s);
    let ln_mass = ln_upper_raw(s, c);
    if ln_mass - lg > -std::f64::consts::LN_2 {
        loop {
            let y = gamma_unit(s, rng);
            if y >= c {
                return y;
            }
        }
    }
    let target = uniform_open(rng).ln() + ln_mass;
    // Solve ln Γ(s, y) = target for y >= c; the tail is close to exponential.
    let mut lo = c;
    let mut up = f64::INFINITY;
    let mut y = c + (ln_mass - target);
    for _ in 0..200 {
        let g = ln_upper_raw(s, y);
        let resid = g - target;
        if resid > 0.0 {
            lo = y;
        } else {
            up = y;
        }
        // d/dy ln Γ(s, y) = -y^{s-1} e^{-y} / Γ(s, y)
        let slope = -((s - 1.0) * y.ln() - y - g).exp();
        let mut next = y - resid / slope;
        if !(next > lo && next < up) || !next.is_finite() {
            next = if up.is_finite() { 0.5 * (lo + up) } else { lo + 2.0 * (lo - y).abs().max(1.0) };
        }
        if (next - y).abs() <= 1e-15 * y.abs().max(1.0) {
            y = next;
            break;
        }
        y = next;
    }
    y.max(c)
}
