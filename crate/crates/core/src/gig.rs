//! Jump magnitudes of the GIG subordinator.
//!
//! The GIG Lévy density is split at the envelope breakpoint into N1 (small
//! z) and N2 (large z). Each half is sampled in three thinning stages:
//!
//! 1. a gamma pair (N1) or tempered-stable process (N2) dominating the
//!    envelope marginal;
//! 2. acceptance of x with probability marginal / dominating density;
//! 3. a truncated √Gamma draw of z given x, accepted with the Hankel ratio
//!    bound(z) / (z|H_ν(z)|²), optionally short-cut by a constant squeeze.
//!
//! At |λ| = 1/2 the density is exactly tempered stable and only stage 1
//! remains. For λ > 0 an extra gamma process is added.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::envelope::{Envelope, EnvelopeConfig, Regime};
use crate::error::{invalid, Result};
use crate::params::GigParams;
use crate::point_process::{
    sample_gamma_process_counted, sample_tempered_stable_counted, Interval, StageCounts,
};
use crate::specfun::{draw_sqrt_gamma, ln_gamma, ln_lower_raw, ln_upper_raw, lower_scaled_raw, Truncation};
use crate::truncation::{adaptive_sample, Family, ResidualMoments, TruncatedComponent, TruncationConfig};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// The independently truncated pieces of the GIG Lévy density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentKind {
    N1,
    N2,
    /// |λ| = 1/2, where the density is tempered stable.
    ExactTs,
    /// λ e^{-xγ²/2} / x, present when λ > 0.
    PositiveGamma,
}

impl ComponentKind {
    pub fn label(self) -> &'static str {
        match self {
            ComponentKind::N1 => "n1",
            ComponentKind::N2 => "n2",
            ComponentKind::ExactTs => "exact_ts",
            ComponentKind::PositiveGamma => "positive_gamma",
        }
    }
}

/// Per-stage proposal / acceptance counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AcceptanceStats {
    /// Thinning inside the gamma / tempered-stable generator itself.
    pub tempering: StageCounts,
    /// Envelope marginal over dominating density.
    pub marginal: StageCounts,
    /// Hankel-ratio stage.
    pub hankel: StageCounts,
    /// Hankel-stage points accepted by the squeeze without drawing z.
    pub squeezed: u64,
}

impl AcceptanceStats {
    pub fn merge(&mut self, o: &AcceptanceStats) {
        self.tempering.merge(&o.tempering);
        self.marginal.merge(&o.marginal);
        self.hankel.merge(&o.hankel);
        self.squeezed += o.squeezed;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Proposal {
    GammaPair { c1: f64, b1: f64, c2: f64, b2: f64 },
    Gamma { c: f64, beta: f64 },
    Ts { c: f64, alpha: f64, beta: f64 },
}

impl Proposal {
    fn families(&self) -> Vec<Family> {
        match *self {
            Proposal::GammaPair { c1, b1, c2, b2 } => {
                vec![Family::Gamma { c: c1, beta: b1 }, Family::Gamma { c: c2, beta: b2 }]
            }
            Proposal::Gamma { c, beta } => vec![Family::Gamma { c, beta }],
            Proposal::Ts { c, alpha, beta } => vec![Family::TemperedStable { c, alpha, beta }],
        }
    }

    fn sample<R: Rng + ?Sized>(&self, iv: Interval, rng: &mut R, counts: &mut StageCounts) -> Result<Vec<f64>> {
        match *self {
            Proposal::GammaPair { c1, b1, c2, b2 } => {
                let mut a = sample_gamma_process_counted(c1, b1, iv, rng, counts)?;
                a.extend(sample_gamma_process_counted(c2, b2, iv, rng, counts)?);
                Ok(a)
            }
            Proposal::Gamma { c, beta } => sample_gamma_process_counted(c, beta, iv, rng, counts),
            Proposal::Ts { c, alpha, beta } => sample_tempered_stable_counted(c, alpha, beta, iv, rng, counts),
        }
    }
}

/// Stage-2 acceptance probability as a function of y = split² x / (2δ²).
#[derive(Debug, Clone, Copy, PartialEq)]
enum Marginal {
    /// Exact dominating density.
    One,
    /// [γ(ν, y)/y^ν] ν(1+ν) / (1 + ν e^{-y}) against the gamma pair.
    GammaPair { nu: f64 },
    /// P(ν, y) against a stable density.
    RegLower { nu: f64 },
    /// Γ(1/2, y) e^y / √π against a tempered-stable density.
    HalfUpperTilted,
    /// Γ(1/2, y) / √π.
    HalfUpper,
}

impl Marginal {
    fn prob(&self, y: f64) -> f64 {
        let p = match *self {
            Marginal::One => 1.0,
            Marginal::GammaPair { nu } => lower_scaled_raw(nu, y) * nu * (1.0 + nu) / (1.0 + nu * (-y).exp()),
            Marginal::RegLower { nu } => (ln_lower_raw(nu, y) - ln_gamma(nu)).exp(),
            Marginal::HalfUpperTilted => (ln_upper_raw(0.5, y) + y).exp() / SQRT_PI,
            Marginal::HalfUpper => ln_upper_raw(0.5, y).exp() / SQRT_PI,
        };
        p.min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Below,
    Above,
}

/// Lower-bounding tempered-stable density δ-scaled by the free parameter β0:
/// C = k √(β0-1)/β0, β = base + β0 slope.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TsLower {
    k: f64,
    base: f64,
    slope: f64,
}

impl TsLower {
    fn family(&self, beta0: f64) -> Family {
        Family::TemperedStable { c: self.k * (beta0 - 1.0).sqrt() / beta0, alpha: 0.5, beta: self.base + beta0 * self.slope }
    }

    fn best(&self, eps: f64, beta0: Option<f64>) -> (f64, f64) {
        match beta0 {
            Some(b) => self.family(b).residual(eps),
            None => {
                let m = golden_max(|b| self.family(b).residual(eps).0, 1.0 + 1e-9, 50.0);
                let v = golden_max(|b| self.family(b).residual(eps).1, 1.0 + 1e-9, 50.0);
                (self.family(m).residual(eps).0, self.family(v).residual(eps).1)
            }
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-7 * hi {
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
    0.5 * (lo + hi)
}

/// One piece of the GIG density with its sampler and residual bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GigComponent {
    pub kind: ComponentKind,
    proposal: Proposal,
    marginal: Marginal,
    /// √Gamma shape and truncation side of the Hankel stage.
    hankel: Option<(f64, Side)>,
    env: Envelope,
    exact: bool,
    ga_lower: Option<Family>,
    ts_lower: Option<TsLower>,
    /// Fixed β0, or None to optimise it per ε.
    beta0: Option<f64>,
    pub stats: AcceptanceStats,
}

impl GigComponent {
    /// Stage-2 acceptance probability at x.
    pub fn marginal_prob(&self, x: f64) -> f64 {
        self.marginal.prob(self.env.split * self.env.split * self.env.z_rate(x))
    }

    /// Stage 3 at a given x: draws z if needed and returns the decision.
    pub fn hankel_test<R: Rng + ?Sized>(&mut self, x: f64, rng: &mut R) -> bool {
        let Some((shape, side)) = self.hankel else {
            // exact density: every point passes without a z draw
            self.stats.hankel.proposed += 1;
            self.stats.hankel.accepted += 1;
            self.stats.squeezed += 1;
            return true;
        };
        self.stats.hankel.proposed += 1;
        let w: f64 = rng.random();
        if let Some(s) = self.env.squeeze {
            if w <= s {
                self.stats.squeezed += 1;
                self.stats.hankel.accepted += 1;
                return true;
            }
        }
        let trunc = match side {
            Side::Below => Truncation::Right(self.env.split),
            Side::Above if self.env.split == 0.0 => Truncation::Full,
            Side::Above => Truncation::Left(self.env.split),
        };
        let z = draw_sqrt_gamma(shape, self.env.z_rate(x), trunc, rng);
        let ok = w <= self.env.ratio(z);
        if ok {
            self.stats.hankel.accepted += 1;
        }
        ok
    }

    /// Jumps of this component in `iv`, in generation order.
    pub fn sample<R: Rng + ?Sized>(&mut self, iv: Interval, rng: &mut R) -> Result<Vec<f64>> {
        let xs = self.proposal.sample(iv, rng, &mut self.stats.tempering)?;
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            self.stats.marginal.proposed += 1;
            let p = self.marginal_prob(x);
            if p < 1.0 && rng.random::<f64>() >= p {
                continue;
            }
            self.stats.marginal.accepted += 1;
            if self.hankel_test(x, rng) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Upper bounds from the dominating densities, lower bounds from the
    /// dominated gamma / tempered-stable densities (exact when the component
    /// is itself gamma or tempered stable).
    pub fn residual_bounds(&self, eps: f64) -> ResidualMoments {
        let (mut mu, mut vu) = (0.0, 0.0);
        for f in self.proposal.families() {
            let (m, v) = f.residual(eps);
            mu += m;
            vu += v;
        }
        if self.exact {
            return ResidualMoments::exact(mu, vu);
        }
        let (mut ml, mut vl) = (0.0, 0.0);
        if let Some(f) = self.ga_lower {
            let (m, v) = f.residual(eps);
            ml += m;
            vl += v;
        }
        if let Some(t) = self.ts_lower {
            let (m, v) = t.best(eps, self.beta0);
            ml += m;
            vl += v;
        }
        ResidualMoments { mean_upper: mu, var_upper: vu, mean_lower: ml.min(mu), var_lower: vl.min(vu) }
    }
}

impl TruncatedComponent for GigComponent {
    fn label(&self) -> &'static str {
        self.kind.label()
    }

    fn sample_slice(&mut self, iv: Interval, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        self.sample(iv, rng)
    }

    fn residual(&self, eps: f64) -> ResidualMoments {
        self.residual_bounds(eps)
    }
}

/// Sampler for one parameter set; components are cloned per path.
#[derive(Debug, Clone, PartialEq)]
pub struct GigSampler {
    pub params: GigParams,
    pub envelope: Envelope,
    components: Vec<GigComponent>,
}

impl GigSampler {
    /// `beta0` fixes the free parameter of the tempered-stable lower bound;
    /// None optimises it at every ε.
    pub fn new(p: &GigParams, cfg: &EnvelopeConfig, beta0: Option<f64>) -> Result<Self> {
        p.validate()?;
        if let Some(b) = beta0 {
            if !(b > 1.0 && b.is_finite()) {
                return invalid(format!("beta0 must be finite and > 1, got {b}"));
            }
        }
        let nu = p.nu();
        let env = Envelope::new(p, cfg)?;
        let (d, g) = (p.delta, p.gamma);
        let d2 = 2.0 * d * d;
        let half_g2 = 0.5 * g * g;
        let base = |kind, proposal, marginal, hankel| GigComponent {
            kind,
            proposal,
            marginal,
            hankel,
            env,
            exact: false,
            ga_lower: None,
            ts_lower: None,
            beta0,
            stats: AcceptanceStats::default(),
        };
        let mut comps = Vec::new();
        if nu == 0.5 {
            let mut c = base(
                ComponentKind::ExactTs,
                Proposal::Ts { c: d / (2.0 * PI).sqrt(), alpha: 0.5, beta: half_g2 },
                Marginal::One,
                None,
            );
            c.exact = true;
            comps.push(c);
        } else {
            // Lower bounds use the other bound of z|H|², split at its own corner.
            let e = std::f64::consts::E.sqrt();
            let (lo_split, ga_c, ts_k) = match env.regime {
                Regime::A => (env.z0, env.z0 / (PI * PI * env.h0 * nu), 2.0 * d * e / (PI * PI * env.h0)),
                Regime::B => (env.z1, env.z1 / (2.0 * PI * nu), d * e / PI),
            };
            let ga_lower = (lo_split > 0.0).then(|| Family::Gamma {
                c: ga_c,
                beta: half_g2 + nu / (1.0 + nu) * lo_split * lo_split / d2,
            });
            let ts_lower = TsLower { k: ts_k, base: half_g2, slope: lo_split * lo_split / d2 };
            let split = env.split;

            if split > 0.0 {
                let (proposal, marginal) = match env.regime {
                    Regime::A => {
                        if g == 0.0 {
                            return invalid("ν > 1/2 with γ = 0 needs z1 = 0");
                        }
                        let k = split / (2.0 * PI * (1.0 + nu));
                        (
                            Proposal::GammaPair { c1: k / nu, b1: half_g2, c2: k, b2: half_g2 + split * split / d2 },
                            Marginal::GammaPair { nu },
                        )
                    }
                    Regime::B if g > 0.0 => {
                        let k = split / (PI * PI * env.h0 * (1.0 + nu));
                        (
                            Proposal::GammaPair { c1: k / nu, b1: half_g2, c2: k, b2: half_g2 + split * split / d2 },
                            Marginal::GammaPair { nu },
                        )
                    }
                    Regime::B => {
                        let c = (split.ln() * (1.0 - 2.0 * nu) + ln_gamma(nu) + nu * d2.ln()).exp() / (PI * PI * env.h0);
                        (Proposal::Ts { c, alpha: nu, beta: 0.0 }, Marginal::RegLower { nu })
                    }
                };
                let mut n1 = base(ComponentKind::N1, proposal, marginal, Some((nu, Side::Below)));
                if lo_split <= split {
                    n1.ga_lower = ga_lower;
                }
                comps.push(n1);
            }

            let (proposal, marginal) = match env.regime {
                Regime::A => (
                    Proposal::Ts { c: d / (2.0 * PI).sqrt(), alpha: 0.5, beta: half_g2 + split * split / d2 },
                    Marginal::HalfUpperTilted,
                ),
                Regime::B => (
                    Proposal::Ts { c: SQRT_2 * d * SQRT_PI / (PI * PI * env.h0), alpha: 0.5, beta: half_g2 },
                    Marginal::HalfUpper,
                ),
            };
            let mut n2 = base(ComponentKind::N2, proposal, marginal, Some((0.5, Side::Above)));
            if lo_split >= split {
                n2.ts_lower = Some(ts_lower);
            }
            if split == 0.0 {
                n2.ga_lower = ga_lower;
            }
            comps.push(n2);
        }
        if p.lambda > 0.0 {
            let mut c = base(
                ComponentKind::PositiveGamma,
                Proposal::Gamma { c: p.lambda, beta: half_g2 },
                Marginal::One,
                None,
            );
            c.exact = true;
            comps.push(c);
        }
        Ok(Self { params: *p, envelope: env, components: comps })
    }

    pub fn components(&self) -> &[GigComponent] {
        &self.components
    }

    /// Fresh copy of one component (zeroed counters), if present.
    pub fn component(&self, kind: ComponentKind) -> Option<GigComponent> {
        self.components.iter().find(|c| c.kind == kind).cloned()
    }

    /// Sum of component residual bounds at a common ε over the full horizon.
    pub fn residual_bounds(&self, eps: f64) -> ResidualMoments {
        let mut m = ResidualMoments::default();
        for c in &self.components {
            m.add(&c.residual_bounds(eps));
        }
        m
    }

    /// Adaptively truncated jump sizes (descending) with diagnostics.
    pub fn sample(&self, tc: &TruncationConfig, rng: &mut dyn RngCore) -> Result<GigSample> {
        let mut comps = self.components.clone();
        let out = {
            let mut refs: Vec<&mut dyn TruncatedComponent> =
                comps.iter_mut().map(|c| c as &mut dyn TruncatedComponent).collect();
            adaptive_sample(&mut refs, tc, 0.0, rng)?
        };
        let mut sizes = out.sizes;
        sizes.sort_by(|a, b| b.total_cmp(a));
        let components = comps
            .iter()
            .zip(&out.stops)
            .map(|(c, s)| ComponentReport { kind: c.kind, eps_final: s.eps_final, slices: s.slices, residual: s.residual, stats: c.stats })
            .collect();
        Ok(GigSample { sizes, components, residual: out.residual })
    }
}

/// Final state of one component after adaptive truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentReport {
    pub kind: ComponentKind,
    pub eps_final: f64,
    pub slices: usize,
    pub residual: ResidualMoments,
    pub stats: AcceptanceStats,
}

/// GIG jump sizes over one horizon plus truncation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GigSample {
    /// Descending.
    pub sizes: Vec<f64>,
    pub components: Vec<ComponentReport>,
    /// Residual bounds summed over components at their own ε.
    pub residual: ResidualMoments,
}

fn sample_kind<R: RngCore>(
    kind: ComponentKind,
    p: &GigParams,
    cfg: &EnvelopeConfig,
    iv: Interval,
    rng: &mut R,
) -> Result<(Vec<f64>, AcceptanceStats)> {
    let s = GigSampler::new(p, cfg, Some(2.0))?;
    let Some(mut c) = s.component(kind) else {
        return Ok((Vec::new(), AcceptanceStats::default()));
    };
    let mut v = c.sample(iv, rng)?;
    v.sort_by(|a, b| b.total_cmp(a));
    Ok((v, c.stats))
}

/// N1 jumps in `iv`. Empty when the envelope has no N1 part (|λ| = 1/2 or
/// z1 = 0). γ = 0 with |λ| > 1/2 is rejected.
pub fn sample_n1<R: RngCore>(p: &GigParams, cfg: &EnvelopeConfig, iv: Interval, rng: &mut R) -> Result<(Vec<f64>, AcceptanceStats)> {
    if p.gamma == 0.0 && p.nu() > 0.5 {
        return invalid("N1 needs γ > 0 when |λ| > 1/2");
    }
    sample_kind(ComponentKind::N1, p, cfg, iv, rng)
}

/// N2 jumps in `iv`; at |λ| = 1/2 the exact tempered-stable process.
pub fn sample_n2<R: RngCore>(p: &GigParams, cfg: &EnvelopeConfig, iv: Interval, rng: &mut R) -> Result<(Vec<f64>, AcceptanceStats)> {
    let kind = if p.nu() == 0.5 { ComponentKind::ExactTs } else { ComponentKind::N2 };
    sample_kind(kind, p, cfg, iv, rng)
}

/// Gamma-process jumps (C = λ, β = γ²/2) added when λ > 0.
pub fn sample_positive_lambda_extra<R: RngCore>(p: &GigParams, iv: Interval, rng: &mut R) -> Result<Vec<f64>> {
    p.validate()?;
    if !(p.lambda > 0.0) {
        return invalid(format!("extra gamma component needs λ > 0, got {}", p.lambda));
    }
    let mut v = crate::point_process::sample_gamma_process(p.lambda, 0.5 * p.gamma * p.gamma, iv, rng)?;
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Adaptively truncated GIG jump sizes over one horizon.
pub fn sample_gig<R: RngCore>(p: &GigParams, tc: &TruncationConfig, cfg: &EnvelopeConfig, rng: &mut R) -> Result<GigSample> {
    let beta0 = (!tc.optimize_beta0).then_some(tc.beta0);
    GigSampler::new(p, cfg, beta0)?.sample(tc, rng)
}
