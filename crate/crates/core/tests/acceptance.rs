//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Exits 0 regardless of outcome so the workspace test run reports the
//! numbers; set GHLEVY_ACCEPTANCE_STRICT=1 to exit 1 on any FAIL.

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use ghlevy_core::envelope::*;
use ghlevy_core::gh::GhSimulator;
use ghlevy_core::gig::{ComponentKind, GigSampler};
use ghlevy_core::oracle::{gh_pdf, gh_variate, gig_moment, gig_variate, ks_critical_value, ks_two_sample};
use ghlevy_core::point_process::Interval;
use ghlevy_core::quad::{integrate_log, integrate_to_inf};
use ghlevy_core::rng::substream;
use ghlevy_core::specfun::{bessel_jy, gamma, reg_lower_inc_gamma, scaled_hankel_sq};
use ghlevy_core::truncation::{gig_residual_bounds, TruncationConfig};
use ghlevy_core::{GhParams, GigParams};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, ok: bool, what: &str, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("criterion {id}: {} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn gh(l: f64, d: f64, g: f64, b: f64) -> GhParams {
    GhParams::new(GigParams::new(l, d, g).unwrap(), 0.0, b, 1.0).unwrap()
}

fn simulated_endpoints(p: &GhParams, tc: &TruncationConfig, cfg: &EnvelopeConfig, seed: u64, n: u64) -> Vec<f64> {
    let sim = GhSimulator::new(p, tc, cfg, 1.0).unwrap();
    (0..n)
        .map(|i| {
            let mut r = substream(seed, i);
            sim.path(&mut r).unwrap().endpoint(&mut r)
        })
        .collect()
}

fn oracle_endpoints(p: &GhParams, seed: u64, n: usize) -> Vec<f64> {
    let mut r = substream(seed, u64::MAX);
    (0..n).map(|_| gh_variate(p, &mut r).unwrap()).collect()
}

fn ks_vs_oracle(p: &GhParams, tau: f64, seed: u64, n: usize) -> f64 {
    let tc = TruncationConfig { tau, p_t: 0.05, ..Default::default() };
    let a = simulated_endpoints(p, &tc, &EnvelopeConfig::for_params(&p.gig), seed, n as u64);
    ks_two_sample(&a, &oracle_endpoints(p, seed, n)).unwrap()
}

const N: usize = 100_000;

fn marginal_law(rep: &mut Report) {
    let cases = [(-0.4, 0.01, 0.012), (-0.8, 0.01, 0.015), (-2.5, 0.1, 0.02), (-10.0, 0.1, 0.025)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, (l, tau, max)) in cases.into_iter().enumerate() {
        let t = Instant::now();
        let d = ks_vs_oracle(&gh(l, 1.0, 0.1, 0.0), tau, 100 + k as u64, N);
        ok &= d <= max;
        detail.push(format!("λ={l} τ={tau} KS={d:.4} (≤{max}, {:.1}s)", t.elapsed().as_secs_f64()));
    }
    rep.line(1, ok, "marginal KS vs oracle, N=1e5", detail.join("; "));
}

fn special_cases(rep: &mut Report) {
    let p = GigParams::new(-0.5, 1.0, 0.1).unwrap();
    let s = GigSampler::new(&p, &EnvelopeConfig::for_params(&p), Some(2.0)).unwrap();
    let tc = TruncationConfig::default();
    let (mut mp, mut ma, mut hp, mut ha) = (0, 0, 0, 0);
    for i in 0..10_000 {
        for c in s.sample(&tc, &mut substream(200, i)).unwrap().components {
            mp += c.stats.marginal.proposed;
            ma += c.stats.marginal.accepted;
            hp += c.stats.hankel.proposed;
            ha += c.stats.hankel.accepted;
        }
    }
    let exact = mp == ma && hp == ha && hp > 0;
    // Student-t cases run at τ = 0.01
    let d0 = ks_vs_oracle(&gh(-2.5, 5f64.sqrt(), 0.0, 0.0), 0.01, 201, N);
    let d2 = ks_vs_oracle(&gh(-2.5, 5f64.sqrt(), 0.0, 2.0), 0.01, 202, N);
    rep.line(
        2,
        exact && d0 <= 0.02 && d2 <= 0.02,
        "NIG exact acceptance, Student-t KS",
        format!("NIG marginal {ma}/{mp} hankel {ha}/{hp}; Student-t β=0 KS={d0:.4}, β=2 KS={d2:.4} (≤0.02)"),
    );
}

fn bessel_bounds(rep: &mut Report) {
    let mut worst = 0.0f64;
    let mut violations = 0;
    for nu in [0.3, 0.45, 0.55, 0.8, 1.5, 3.0, 10.0] {
        let z1 = z1_max(nu).unwrap();
        let h0 = scaled_hankel_sq(nu, z1).unwrap();
        for k in 0..=140 {
            let z = 10f64.powf(-4.0 + 7.0 * k as f64 / 140.0);
            let h = scaled_hankel_sq(nu, z).unwrap();
            let (a, b) = (bound_a(z, nu, z1), bound_b(z, nu, z1, h0));
            let slack = 1e-12 * h;
            let ok = if nu < 0.5 { a + slack >= h && h + slack >= b } else { a <= h + slack && h <= b + slack };
            violations += usize::from(!ok);
        }
    }
    for k in 0..=140 {
        let z = 10f64.powf(-4.0 + 7.0 * k as f64 / 140.0);
        worst = worst.max((scaled_hankel_sq(0.5, z).unwrap() - FRAC_2_PI).abs());
    }
    let mut ratio_err = 0.0f64;
    for l in [-0.3, -0.8, -3.0] {
        let p = GigParams::new(l, 1.0, 0.1).unwrap();
        let cfg = EnvelopeConfig::for_params(&p);
        let want = PI * scaled_hankel_sq(p.nu(), cfg.z0).unwrap() / 2.0;
        for i in 0..20 {
            for j in 0..20 {
                let x = 10f64.powf(-3.0 + 4.0 * i as f64 / 19.0);
                let z = 10f64.powf(-3.0 + 5.0 * j as f64 / 19.0);
                let qa = envelope_xz(x, z, &p, &cfg, Regime::A).unwrap();
                let qb = envelope_xz(x, z, &p, &cfg, Regime::B).unwrap();
                if qa > 1e-290 && qb > 1e-290 {
                    ratio_err = ratio_err.max((qa / qb / want - 1.0).abs());
                }
            }
        }
    }
    rep.line(
        3,
        violations == 0 && worst <= 1e-12 && ratio_err <= 1e-10,
        "Bessel bound sandwich",
        format!("{violations} ordering violations; max |zH²-2/π| at ν=0.5 = {worst:.1e}; max rel err of Q^A/Q^B vs πH0/2 = {ratio_err:.1e}"),
    );
}

/// ∫_0^ε x^n Q_GIG(x) dx with the x-integral in closed form under the z-integral.
fn gig_residual_quadrature(p: &GigParams, eps: f64, n: i32) -> f64 {
    let nf = n as f64;
    let inner = |b: f64| gamma(nf) * reg_lower_inc_gamma(nf, b * eps).unwrap() / b.powi(n);
    let f = |z: f64| {
        let jy = bessel_jy(p.nu(), z).unwrap();
        let b = 0.5 * p.gamma * p.gamma + z * z / (2.0 * p.delta * p.delta);
        2.0 / (PI * PI * z * (jy.j * jy.j + jy.y * jy.y)) * inner(b)
    };
    let zmax = 1e9;
    let body = integrate_log(f, 1e-30, zmax, 1e-10, 0.0).unwrap().value;
    let tail = if n == 1 { 2.0 * p.delta * p.delta / (PI * zmax) } else { 0.0 };
    let extra = if p.lambda > 0.0 { p.lambda * inner(0.5 * p.gamma * p.gamma) } else { 0.0 };
    body + tail + extra
}

fn residual_sandwich(rep: &mut Report) {
    let mut bad = Vec::new();
    let mut rows = 0;
    for (l, d, g) in [(-0.8, 1.0, 0.1), (-0.3, 1.0, 0.5), (1.5, 2.0, 1.0)] {
        let p = GigParams::new(l, d, g).unwrap();
        let cfg = EnvelopeConfig::for_params(&p);
        for k in 0..8 {
            let eps = 10f64.powf(-6.0 + 6.0 * k as f64 / 7.0);
            let m = gig_residual_bounds(&p, &cfg, eps, 1.0, 1.0, Some(2.0)).unwrap();
            let (qm, qv) = (gig_residual_quadrature(&p, eps, 1), gig_residual_quadrature(&p, eps, 2));
            let s = 1.0 + 1e-8;
            if !(m.mean_lower <= qm * s && qm <= m.mean_upper * s && m.var_lower <= qv * s && qv <= m.var_upper * s) {
                bad.push(format!("λ={l} ε={eps:.1e}"));
            }
            rows += 1;
        }
    }
    rep.line(4, bad.is_empty(), "residual moment sandwich", format!("{rows} rows, failures: {bad:?}"));
}

fn acceptance_bounds(rep: &mut Report) {
    let mut worst = f64::INFINITY;
    let mut bins = 0;
    let mut bad = Vec::new();
    let per_bin = 100_000;
    for (k, l) in [-0.6, -0.8, -2.5].into_iter().enumerate() {
        let p = GigParams::new(l, 1.0, 0.1).unwrap();
        let cfg = EnvelopeConfig::for_params(&p);
        let s = GigSampler::new(&p, &cfg, Some(2.0)).unwrap();
        let mut rng = substream(300, k as u64);
        for (kind, part) in [(ComponentKind::N1, Part::N1), (ComponentKind::N2, Part::N2)] {
            for j in 0..6 {
                let x = 10f64.powf(-3.0 + j as f64 * 0.8);
                let mut c = s.component(kind).unwrap();
                for _ in 0..per_bin {
                    c.hankel_test(x, &mut rng);
                }
                let rate = c.stats.hankel.rate();
                let se = (rate * (1.0 - rate) / per_bin as f64).sqrt().max(1.0 / per_bin as f64);
                let (_, bound) = optimize_z0(x, &p, cfg.z1, part).unwrap();
                let margin = (rate - bound) / se;
                worst = worst.min(margin);
                if margin < -4.0 {
                    bad.push(format!("λ={l} {kind:?} x={x:.0e}: {rate:.4} < {bound:.4}"));
                }
                bins += 1;
            }
        }
    }
    rep.line(
        5,
        bad.is_empty(),
        "empirical acceptance ≥ optimised lower bound − 4SE",
        format!("{bins} bins × {per_bin} proposals, min (rate-bound)/SE = {worst:.2}; failures: {bad:?}"),
    );
}

fn squeeze(rep: &mut Report) {
    let tc = TruncationConfig::default();
    let mut ks_ok = true;
    let mut frac_ok = true;
    let mut time_ok = true;
    let mut detail = Vec::new();
    for (k, l) in [-0.6, -0.8, -1.0, -1.5].into_iter().enumerate() {
        let p = gh(l, 1.0, 0.1, 0.0);
        let on = EnvelopeConfig::for_params(&p.gig);
        let off = EnvelopeConfig { squeeze: false, ..on };
        let seed = 400 + 2 * k as u64;
        let a = simulated_endpoints(&p, &tc, &on, seed, 10_000);
        let b = simulated_endpoints(&p, &tc, &off, seed + 1, 10_000);
        let d = ks_two_sample(&a, &b).unwrap();
        ks_ok &= d < ks_critical_value(0.01, a.len(), b.len());

        let s_on = GigSampler::new(&p.gig, &on, Some(2.0)).unwrap();
        let s_off = GigSampler::new(&p.gig, &off, Some(2.0)).unwrap();
        let (mut squeezed, mut tests) = (0u64, 0u64);
        for i in 0..5_000 {
            for c in s_on.sample(&tc, &mut substream(seed, i)).unwrap().components {
                squeezed += c.stats.squeezed;
                tests += c.stats.hankel.proposed;
            }
        }
        let frac = squeezed as f64 / tests as f64;
        let want = 2.0 / (PI * scaled_hankel_sq(p.gig.nu(), on.z0).unwrap());
        frac_ok &= (frac - want).abs() <= 0.02;

        // interleaved rounds, best of three
        let time = |s: &GigSampler| {
            let t = Instant::now();
            for i in 0..5_000 {
                s.sample(&tc, &mut substream(seed + 7, i)).unwrap();
            }
            t.elapsed().as_secs_f64()
        };
        let (mut t_on, mut t_off) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..3 {
            t_on = t_on.min(time(&s_on));
            t_off = t_off.min(time(&s_off));
        }
        time_ok &= t_on <= t_off;
        detail.push(format!(
            "λ={l}: KS={d:.4} skipped={frac:.4} vs 2/(πH0)={want:.4} time {:.1}/{:.1} µs",
            t_on / 5e-3,
            t_off / 5e-3
        ));
    }
    rep.line(6, ks_ok && frac_ok && time_ok, "squeeze equivalence, skip fraction, timing", detail.join("; "));
}

fn calibration(rep: &mut Report) {
    let p = GigParams::new(-0.8, 1.0, 0.1).unwrap();
    let tc = TruncationConfig::default();
    let s = GigSampler::new(&p, &EnvelopeConfig::for_params(&p), Some(tc.beta0)).unwrap();
    let runs = 2000;
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [ComponentKind::N1, ComponentKind::N2] {
        let mut hits = 0;
        for i in 0..runs {
            let mut r = substream(500, i);
            let g = s.sample(&tc, &mut r).unwrap();
            let e: f64 = g.sizes.iter().sum();
            let rep_k = g.components.iter().find(|c| c.kind == kind).unwrap();
            let mut c = s.component(kind).unwrap();
            let eps = rep_k.eps_final;
            let tail: f64 = c.sample(Interval::new(eps / 64.0, eps).unwrap(), &mut r).unwrap().iter().sum();
            let shift = if tc.mean_adjust { rep_k.residual.mean_lower } else { 0.0 };
            if tail - shift >= tc.tau * e {
                hits += 1;
            }
        }
        let f = hits as f64 / runs as f64;
        let lim = tc.p_t + 4.0 * (tc.p_t * (1.0 - tc.p_t) / runs as f64).sqrt();
        ok &= f <= lim;
        detail.push(format!("{kind:?} exceedance {f:.4} (≤{lim:.4})"));
    }
    rep.line(7, ok, "truncation calibration, 2000 runs, ε_ref = ε_final/64", detail.join("; "));
}

fn oracle(rep: &mut Report) {
    let grid = [(-0.8, 1.0, 0.1), (-0.3, 1.0, 0.5), (0.5, 2.0, 1.0), (1.5, 1.0, 2.0), (3.0, 0.5, 4.0), (-5.0, 2.0, 0.0)];
    let mut worst = 0.0f64;
    for (k, (l, d, g)) in grid.into_iter().enumerate() {
        let p = GigParams::new(l, d, g).unwrap();
        let mut r = substream(600, k as u64);
        let x: Vec<f64> = (0..N).map(|_| gig_variate(&p, &mut r).unwrap()).collect();
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        for (v, m) in [(&x, 1), (&sq, 2)] {
            let (mean, se) = mean_se(v);
            worst = worst.max((mean - gig_moment(&p, m).unwrap()).abs() / se);
        }
    }
    let mut mass_err = 0.0f64;
    for p in [gh(-0.8, 1.0, 1.0, 0.0), gh(-0.5, 1.0, 0.1, 0.0), gh(1.5, 1.0, 1.0, 0.5), gh(-2.5, 5f64.sqrt(), 0.0, 0.0), gh(-10.0, 1.0, 0.1, 0.05)] {
        let f = |w: f64| gh_pdf(&p, w).unwrap();
        let m = integrate_to_inf(|x| f(x), 0.0, 1e-12, 0.0).unwrap().value
            + integrate_to_inf(|x| f(-x), 0.0, 1e-12, 0.0).unwrap().value;
        mass_err = mass_err.max((m - 1.0).abs());
    }
    rep.line(
        8,
        worst <= 4.0 && mass_err <= 1e-6,
        "oracle moments and density mass",
        format!("max |moment error|/SE = {worst:.2} over 6 sets; max |mass-1| = {mass_err:.1e}"),
    );
}

fn main() {
    let mut rep = Report { failed: 0 };
    let t = Instant::now();
    marginal_law(&mut rep);
    special_cases(&mut rep);
    bessel_bounds(&mut rep);
    residual_sandwich(&mut rep);
    acceptance_bounds(&mut rep);
    squeeze(&mut rep);
    calibration(&mut rep);
    oracle(&mut rep);
    println!("acceptance: {} of 8 criteria failed ({:.0}s)", rep.failed, t.elapsed().as_secs_f64());
    if rep.failed > 0 && std::env::var("GHLEVY_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
