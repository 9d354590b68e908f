use std::f64::consts::{FRAC_2_PI, PI};

use ghlevy_core::envelope::*;
use ghlevy_core::quad::{integrate_log, integrate_to_inf};
use ghlevy_core::specfun::{bessel_jy, lower_inc_gamma, scaled_hankel_sq, upper_inc_gamma};
use ghlevy_core::GigParams;
use proptest::prelude::*;

const ORDERS: [f64; 7] = [0.3, 0.45, 0.55, 0.8, 1.5, 3.0, 10.0];

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn cfg_at(nu: f64) -> (EnvelopeConfig, f64) {
    let z = z1_max(nu).unwrap();
    (EnvelopeConfig { z1: z, z0: z, squeeze: true }, scaled_hankel_sq(nu, z).unwrap())
}

#[test]
fn z1_max_values() {
    assert!((z1_max(0.8).unwrap() - 0.4926).abs() < 5e-4);
    assert!(matches!(z1_max(0.5), Err(ghlevy_core::Error::Singular(_))));
    for nu in [0.3, 0.8] {
        let z = z1_max(nu).unwrap();
        assert!((bound_a(z, nu, z) - FRAC_2_PI).abs() < 1e-15);
        assert!((bound_a(z * (1.0 - 1e-10), nu, z) - FRAC_2_PI).abs() < 1e-9);
    }
}

#[test]
fn squeeze_constant_tends_to_one_near_half() {
    for nu in [0.5 - 1e-4, 0.5 + 1e-4] {
        let (_, h0) = cfg_at(nu);
        assert!((PI * h0 / 2.0 - 1.0).abs() < 1e-3, "ν={nu}");
    }
}

#[test]
fn hankel_sandwich_on_grid() {
    for nu in ORDERS {
        let (cfg, h0) = cfg_at(nu);
        for z in logspace(1e-4, 1e3, 200) {
            let h = scaled_hankel_sq(nu, z).unwrap();
            let a = bound_a(z, nu, cfg.z1);
            let b = bound_b(z, nu, cfg.z0, h0);
            let tol = 1e-12 * h;
            if nu <= 0.5 {
                assert!(a + tol >= h && h + tol >= b, "ν={nu} z={z}: A={a} zH²={h} B={b}");
            } else {
                assert!(a <= h + tol && h <= b + tol, "ν={nu} z={z}: A={a} zH²={h} B={b}");
            }
        }
    }
    for z in logspace(1e-4, 1e3, 50) {
        assert!((scaled_hankel_sq(0.5, z).unwrap() - FRAC_2_PI).abs() < 1e-12);
    }
}

#[test]
fn half_order_bivariate_density() {
    let p = GigParams::new(-0.5, 1.3, 0.4).unwrap();
    for (x, z) in [(0.01, 0.2), (0.7, 3.0), (5.0, 0.05)] {
        let want = (-x * 0.16 / 2.0f64).exp() / (PI * x) * (-z * z * x / (2.0 * 1.69f64)).exp();
        assert!((q_gig_xz(x, z, &p) / want - 1.0).abs() < 1e-12);
    }
}

/// Lévy density from its y = z² integral form, with J and Y computed directly.
fn levy_density_y_form(x: f64, p: &GigParams) -> f64 {
    let nu = p.nu();
    let f = |y: f64| {
        let z = y.sqrt();
        let jy = bessel_jy(nu, z).unwrap();
        (-x * y / (2.0 * p.delta * p.delta)).exp() / (PI * PI * y * (jy.j * jy.j + jy.y * jy.y))
    };
    let head = 1e-300f64;
    // leading small-y term: y^{ν-1} π² / (Γ(ν)² 2^{2ν} π²) integrated from 0 to head
    let lead = (nu * head.ln() - 2.0 * libm::lgamma(nu) - 2.0 * nu * 2f64.ln()).exp() / nu;
    let q = integrate_log(f, head, 4000.0 / x * p.delta * p.delta, 1e-11, 0.0).unwrap().value + lead;
    (-x * p.gamma * p.gamma / 2.0).exp() / x * (q + p.lambda.max(0.0))
}

#[test]
fn bivariate_density_has_the_levy_density_as_marginal() {
    for (l, d, g) in [(-0.8, 1.0, 0.1), (-0.3, 0.5, 1.0), (1.7, 2.0, 0.3)] {
        let p = GigParams::new(l, d, g).unwrap();
        let x = 0.7;
        let via_z = integrate_log(|z| q_gig_xz(x, z, &p), 1e-150, 200.0, 1e-11, 0.0).unwrap().value
            + if l > 0.0 { l * (-x * g * g / 2.0f64).exp() / x } else { 0.0 };
        let via_y = levy_density_y_form(x, &p);
        assert!((via_z / via_y - 1.0).abs() < 1e-6, "{l}: {via_z} vs {via_y}");
        let lib = gig_levy_density(x, &p).unwrap();
        assert!((lib / via_y - 1.0).abs() < 1e-6, "{l}: {lib} vs {via_y}");
    }
}

#[test]
fn envelope_ordering_and_constant_ratio() {
    for nu in [0.3, 0.45, 0.55, 0.8, 2.5] {
        let p = GigParams::new(-nu, 1.0, 0.2).unwrap();
        let (cfg, h0) = cfg_at(nu);
        for x in logspace(1e-3, 20.0, 15) {
            for z in logspace(1e-4, 50.0, 40) {
                let q = q_gig_xz(x, z, &p);
                let a = envelope_xz(x, z, &p, &cfg, Regime::A).unwrap();
                let b = envelope_xz(x, z, &p, &cfg, Regime::B).unwrap();
                let tol = 1e-11 * q;
                if nu >= 0.5 {
                    assert!(b <= q + tol && q <= a + tol, "ν={nu} x={x} z={z}");
                } else {
                    assert!(a <= q + tol && q <= b + tol, "ν={nu} x={x} z={z}");
                }
                if b > 1e-290 {
                    assert!((a / b / (PI * h0 / 2.0) - 1.0).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn dominating_marginals_integrate_the_envelopes() {
    for (nu, g) in [(0.8, 0.1), (0.3, 0.5), (2.5, 1.0)] {
        let p = GigParams::new(-nu, 1.2, g).unwrap();
        let (cfg, _) = cfg_at(nu);
        for regime in [Regime::A, Regime::B] {
            let split = if regime == Regime::A { cfg.z1 } else { cfg.z0 };
            for x in [1e-3, 0.3, 4.0] {
                let n1 = integrate_log(|z| envelope_xz(x, z, &p, &cfg, regime).unwrap(), 1e-200, split, 1e-12, 0.0).unwrap().value;
                let n2 = integrate_to_inf(|z| envelope_xz(x, z, &p, &cfg, regime).unwrap(), split, 1e-12, 0.0).unwrap().value;
                let m1 = dominating_marginal(x, &p, &cfg, regime, Part::N1).unwrap();
                let m2 = dominating_marginal(x, &p, &cfg, regime, Part::N2).unwrap();
                assert!((m1 / n1 - 1.0).abs() < 1e-8, "ν={nu} {regime:?} x={x} N1 {m1} vs {n1}");
                assert!((m2 / n2 - 1.0).abs() < 1e-8, "ν={nu} {regime:?} x={x} N2 {m2} vs {n2}");
            }
        }
    }
}

#[test]
fn regime_a_marginals_sit_under_their_proposals() {
    let nu = 0.8;
    let p = GigParams::new(-nu, 1.0, 0.1).unwrap();
    let (cfg, _) = cfg_at(nu);
    let (d, g, z1) = (p.delta, p.gamma, cfg.z1);
    for x in logspace(1e-6, 100.0, 60) {
        let y1 = z1 * z1 * x / (2.0 * d * d);
        let ts = d * (-(z1 * z1 / (2.0 * d * d) + g * g / 2.0) * x).exp() / ((2.0 * PI).sqrt() * x.powf(1.5));
        let pair = z1 / (2.0 * PI * x) * (-x * g * g / 2.0).exp() * (1.0 / (nu * (1.0 + nu)) + (-y1).exp() / (1.0 + nu));
        assert!(dominating_marginal(x, &p, &cfg, Regime::A, Part::N2).unwrap() <= ts * (1.0 + 1e-12));
        assert!(dominating_marginal(x, &p, &cfg, Regime::A, Part::N1).unwrap() <= pair * (1.0 + 1e-12));
    }
    // x → 0: Q^A_N1(x) x → z1 / (2πν)
    let x = 1e-12;
    let v = dominating_marginal(x, &p, &cfg, Regime::A, Part::N1).unwrap() * x;
    assert!((v / (z1 / (2.0 * PI * nu)) - 1.0).abs() < 1e-6);
}

#[test]
fn thinning_ratio_cases() {
    let p = GigParams::new(-0.5, 1.0, 0.1).unwrap();
    let cfg = EnvelopeConfig::for_params(&p);
    for z in logspace(1e-3, 1e3, 20) {
        assert!((thinning_ratio(z, &p, &cfg, Regime::A, Part::N2).unwrap() - 1.0).abs() < 1e-12);
    }

    let p = GigParams::new(-0.3, 1.0, 0.1).unwrap();
    let (cfg, _) = cfg_at(0.3);
    assert!((thinning_ratio(cfg.z0, &p, &cfg, Regime::B, Part::N2).unwrap() - 1.0).abs() < 1e-12);
    assert!(thinning_ratio(cfg.z0 * 0.5, &p, &cfg, Regime::B, Part::N2).is_err());
    assert!(thinning_ratio(cfg.z0 * 2.0, &p, &cfg, Regime::B, Part::N1).is_err());

    let p = GigParams::new(-0.8, 1.0, 0.1).unwrap();
    let (cfg, h0) = cfg_at(0.8);
    for z in logspace(1e-6, cfg.z1 * 0.999, 30) {
        let r = thinning_ratio(z, &p, &cfg, Regime::A, Part::N1).unwrap();
        assert!(r >= 2.0 / (PI * h0) * (1.0 - 1e-12) && r <= 1.0);
    }
    assert!(thinning_ratio(0.3, &p, &cfg, Regime::B, Part::N2).is_err());
}

/// Acceptance lower bounds computed directly from incomplete gamma values.
#[test]
fn acceptance_bound_closed_branches() {
    let nu = 0.8;
    let p = GigParams::new(-nu, 1.0, 0.1).unwrap();
    let z1 = z1_max(nu).unwrap();
    for x in [0.01, 1.0, 30.0] {
        let z0 = 0.5 * z1;
        let h0 = scaled_hankel_sq(nu, z0).unwrap();
        let b = acceptance_lower_bound(x, &p, z0, z1, Part::N2).unwrap();
        assert!((b - (2.0 / (PI * h0)).min(1.0)).abs() < 1e-14);

        let z0 = 2.0 * z1;
        let h0 = scaled_hankel_sq(nu, z0).unwrap();
        let b = acceptance_lower_bound(x, &p, z0, z1, Part::N1).unwrap();
        assert!((b / (2.0 / (PI * h0) * (z1 / z0).powf(2.0 * nu - 1.0)) - 1.0).abs() < 1e-12);

        // z0 < z1 N1 branch and z0 > z1 N2 branch against direct evaluation
        let r = x / 2.0;
        for z0 in [0.3 * z1, 3.0 * z1] {
            let h0 = scaled_hankel_sq(nu, z0).unwrap();
            let (y0, y1) = (z0 * z0 * r, z1 * z1 * r);
            let c = 2.0 / (PI * h0);
            let want = if z0 < z1 {
                let g1 = lower_inc_gamma(nu, y1).unwrap();
                c * ((z1 / z0).powf(2.0 * nu - 1.0) * lower_inc_gamma(nu, y0).unwrap() / g1
                    + y1.powf(nu - 0.5) * (lower_inc_gamma(0.5, y1).unwrap() - lower_inc_gamma(0.5, y0).unwrap()) / g1)
            } else {
                let u1 = upper_inc_gamma(0.5, y1).unwrap();
                c * (upper_inc_gamma(0.5, y0).unwrap() / u1
                    + y0.powf(0.5 - nu) * (lower_inc_gamma(nu, y0).unwrap() - lower_inc_gamma(nu, y1).unwrap()) / u1)
            };
            let part = if z0 < z1 { Part::N1 } else { Part::N2 };
            let got = acceptance_lower_bound(x, &p, z0, z1, part).unwrap();
            assert!((got - want.min(1.0)).abs() < 1e-10 * want, "x={x} z0={z0}: {got} vs {want}");
        }
    }
    assert!(acceptance_lower_bound(1.0, &GigParams::new(-0.3, 1.0, 0.1).unwrap(), 0.5, 0.5, Part::N1).is_err());
}

#[test]
fn optimised_bounds_dominate_feasible_points_and_a_grid_scan() {
    for nu in [0.6, 0.8, 2.5] {
        let p = GigParams::new(-nu, 0.1, 0.1).unwrap();
        let z1 = z1_max(nu).unwrap();
        for x in logspace(1e-3, 1e3, 13) {
            for part in [Part::N1, Part::N2] {
                let (z0, best) = optimize_z0(x, &p, z1, part).unwrap();
                assert!(z0 > 0.0);
                let at = |z0: f64| acceptance_lower_bound(x, &p, z0, z1, part).unwrap();
                assert!(best >= at(z1) - 1e-12 && best >= at(2.0 * z1) - 1e-12);
                let scan = logspace(1e-4 * z1, 1e4 * z1.max(1.0), 4000).into_iter().map(at).fold(0.0, f64::max);
                assert!(best >= scan - 1e-6, "ν={nu} x={x} {part:?}: {best} < scan {scan}");
            }
            // the z1 = 0 envelope has only N2
            let (_, legacy) = optimize_z0(x, &p, 0.0, Part::N2).unwrap();
            let (_, n2) = optimize_z0(x, &p, z1, Part::N2).unwrap();
            assert!(n2 >= legacy - 1e-9, "ν={nu} x={x}: {n2} < legacy {legacy}");
        }
    }
}

#[test]
fn n2_bound_falls_with_order() {
    let x = 1.0;
    let mut prev = f64::INFINITY;
    for nu in [0.6, 0.8, 1.0, 1.5, 2.5, 5.0] {
        let p = GigParams::new(-nu, 1.0, 0.1).unwrap();
        let (_, b) = optimize_z0(x, &p, z1_max(nu).unwrap(), Part::N2).unwrap();
        assert!(b < prev, "ν={nu}");
        prev = b;
    }
}

proptest! {
    #[test]
    fn sandwich_holds_everywhere(nu in 0.05f64..12.0, lz in -9.0f64..7.0) {
        prop_assume!((nu - 0.5).abs() > 1e-6);
        let z = lz.exp();
        let (cfg, h0) = cfg_at(nu);
        let h = scaled_hankel_sq(nu, z).unwrap();
        prop_assume!(h.is_finite());
        let (a, b) = (bound_a(z, nu, cfg.z1), bound_b(z, nu, cfg.z0, h0));
        let tol = 1e-11 * h;
        if nu < 0.5 {
            prop_assert!(a + tol >= h && h + tol >= b);
        } else {
            prop_assert!(a <= h + tol && h <= b + tol);
        }
    }

    #[test]
    fn ratios_are_probabilities(nu in 0.05f64..8.0, lz in -12.0f64..6.0) {
        prop_assume!((nu - 0.5).abs() > 1e-6);
        let p = GigParams::new(-nu, 1.0, 0.3).unwrap();
        let cfg = EnvelopeConfig::for_params(&p);
        let regime = Regime::for_order(nu);
        let z = lz.exp();
        let split = if regime == Regime::A { cfg.z1 } else { cfg.z0 };
        let part = if z < split { Part::N1 } else { Part::N2 };
        let r = thinning_ratio(z, &p, &cfg, regime, part).unwrap();
        prop_assert!(r > 0.0 && r <= 1.0);
    }
}
