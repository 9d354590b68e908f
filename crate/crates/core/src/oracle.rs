//! Reference machinery independent of the series sampler: exact GIG and GH
//! variates, the GH density, GIG moments and Kolmogorov–Smirnov statistics.
//!
//! GIG variates use the ratio-of-uniforms family of Hörmann and Leydold on
//! the standardised density y^{λ-1} exp(-ω(y + 1/y)/2), ω = δγ, with
//! x = (δ/γ) y and x ↦ 1/x for λ < 0. At γ = 0 the law is inverse gamma.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{domain, invalid, Error, Result};
use crate::params::{GhParams, GigParams};
use crate::specfun::{ln_bessel_k, ln_gamma};

const OMEGA_TINY: f64 = 10.0 * f64::EPSILON;

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Mode of y^{λ-1} exp(-ω(y + 1/y)/2), λ >= 0.
fn gig_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

/// Ratio of uniforms with mode shift.
fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    // extrema of (x - xm) sqrt(f(x)) are roots of y³ + a y² + b y + c
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    loop {
        let u = uminus + uniform(rng) * (uplus - uminus);
        let v = uniform(rng);
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Ratio of uniforms without shift.
fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * uniform(rng);
        let v = uniform(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Three-piece hat (constant, power, exponential) for 0 <= λ < 1, small ω.
fn three_piece<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let xm = gig_mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    loop {
        let mut v = total * uniform(rng);
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let a = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * a).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = uniform(rng) * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}

/// One exact GIG(λ, δ, γ) variate.
pub fn gig_variate<R: Rng + ?Sized>(p: &GigParams, rng: &mut R) -> Result<f64> {
    p.validate()?;
    let (lambda, delta, gamma) = (p.lambda, p.delta, p.gamma);
    let omega = delta * gamma;
    if omega < OMEGA_TINY {
        if gamma == 0.0 || lambda < 0.0 {
            // inverse gamma: x = δ²/(2G), G ~ Gamma(-λ, 1)
            if lambda >= 0.0 {
                return invalid("γ = 0 needs λ < 0");
            }
            let g: f64 = Gamma::new(-lambda, 1.0).expect("shape > 0").sample(rng);
            return Ok(delta * delta / (2.0 * g));
        }
        // δγ ≈ 0 with λ > 0: gamma with rate γ²/2
        let g: f64 = Gamma::new(lambda, 1.0).expect("shape > 0").sample(rng);
        return Ok(2.0 * g / (gamma * gamma));
    }
    let l = lambda.abs();
    let y = if l > 2.0 || omega > 3.0 {
        rou_shift(l, omega, rng)
    } else if l >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(l, omega, rng)
    } else {
        three_piece(l, omega, rng)
    };
    let alpha = delta / gamma;
    Ok(if lambda < 0.0 { alpha / y } else { alpha * y })
}

/// E[X^k] of GIG(λ, δ, γ): (δ/γ)^k K_{λ+k}(δγ)/K_λ(δγ), or the inverse
/// gamma moment (δ²/2)^k Γ(-λ-k)/Γ(-λ) at γ = 0 (needs -λ > k).
pub fn gig_moment(p: &GigParams, k: u32) -> Result<f64> {
    p.validate()?;
    let kf = k as f64;
    if p.gamma == 0.0 {
        if -p.lambda <= kf {
            return domain(format!("moment {k} is infinite for λ = {}", p.lambda));
        }
        return Ok((kf * (0.5 * p.delta * p.delta).ln() + ln_gamma(-p.lambda - kf) - ln_gamma(-p.lambda)).exp());
    }
    let w = p.delta * p.gamma;
    Ok((kf * (p.delta / p.gamma).ln() + ln_bessel_k(p.lambda + kf, w)? - ln_bessel_k(p.lambda, w)?).exp())
}

/// GIG mean.
pub fn gig_mean(p: &GigParams) -> Result<f64> {
    gig_moment(p, 1)
}

/// μ + βu + σ√u N(0, 1) with u a GIG variate.
pub fn gh_variate<R: Rng + ?Sized>(p: &GhParams, rng: &mut R) -> Result<f64> {
    p.validate()?;
    let u = gig_variate(&p.gig, rng)?;
    let n: f64 = rng.sample(StandardNormal);
    Ok(p.mu + p.beta * u + p.sigma * u.sqrt() * n)
}

/// ln of the GH density at w.
pub fn gh_ln_pdf(p: &GhParams, w: f64) -> Result<f64> {
    p.validate()?;
    if !w.is_finite() {
        return domain(format!("density argument must be finite, got {w}"));
    }
    let (lambda, delta, gamma) = (p.gig.lambda, p.gig.delta, p.gig.gamma);
    let beta = p.beta / p.sigma;
    let x = (w - p.mu) / p.sigma;
    let alpha = gamma.hypot(beta);
    let r = delta.hypot(x);
    let nu = lambda - 0.5;
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    // ln[γ^λ / K_λ(δγ)], with its γ → 0 limit 2^{1+λ}/(Γ(-λ) δ^λ)
    let ln_tilt = if gamma > 0.0 {
        lambda * gamma.ln() - ln_bessel_k(lambda, delta * gamma)?
    } else {
        (1.0 + lambda) * std::f64::consts::LN_2 - ln_gamma(-lambda) - lambda * delta.ln()
    };
    let ln_core = if alpha > 0.0 {
        // α^{-ν} r^ν K_ν(αr)
        -nu * alpha.ln() + nu * r.ln() + ln_bessel_k(nu, alpha * r)?
    } else {
        // limit α → 0 with ν < 0: (1/2) Γ(-ν) (r/2)^ν r^ν
        -std::f64::consts::LN_2 + ln_gamma(-nu) + nu * (0.5 * r).ln() + nu * r.ln()
    };
    Ok(ln_tilt - half_ln_2pi - lambda * delta.ln() + ln_core + beta * x - p.sigma.ln())
}

/// GH density at w.
pub fn gh_pdf(p: &GhParams, w: f64) -> Result<f64> {
    gh_ln_pdf(p, w).map(f64::exp)
}

fn sorted(a: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().any(|x| x.is_nan()) {
        return domain("sample contains NaN");
    }
    let mut v = a.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let a = sorted(a)?;
    let n = a.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Asymptotic two-sample critical value at level `alpha`:
/// sqrt(-ln(alpha/2)/2) sqrt((n+m)/(nm)).
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(0.5 * alpha).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Matched empirical quantiles at levels (i + 1/2)/n, i = 0..n.
pub fn qq_points(a: &[f64], b: &[f64], n_quantiles: usize) -> Result<Vec<(f64, f64)>> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    Ok((0..n_quantiles)
        .map(|i| {
            let p = (i as f64 + 0.5) / n_quantiles as f64;
            (quantile(&a, p), quantile(&b, p))
        })
        .collect())
}
