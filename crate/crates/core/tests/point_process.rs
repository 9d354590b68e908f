use ghlevy_core::oracle::{ks_one_sample, ks_two_sample};
use ghlevy_core::point_process::*;
use ghlevy_core::quad::integrate_to_inf;
use ghlevy_core::rng::substream;
use proptest::prelude::*;

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn inverse_tail_closed_forms() {
    assert!((ts_inverse_tail(1.0, 0.5, 2.0) - 1.0).abs() < 1e-15);
    assert!((ts_inverse_tail(1.0, 0.5, 8.0) - 0.0625).abs() < 1e-15);
    assert!((gamma_inverse_tail(1.0, 1.0, 2f64.ln()) - 1.0).abs() < 1e-14);
    assert!((gamma_inverse_tail(2.0, 0.5, 2.0 * 2f64.ln()) - 2.0).abs() < 1e-14);
    assert!(ts_inverse_tail(1.0, 0.5, 1e-200) > 1e300);
    assert!(gamma_inverse_tail(1.0, 1.0, 800.0) < 1e-300);
}

#[test]
fn poisson_epoch_counts() {
    let reps = 10_000u64;
    let counts: Vec<usize> = (0..reps)
        .map(|i| {
            let e = epochs_in_range(2.0, 7.0, &mut substream(11, i)).unwrap();
            assert!(e.iter().all(|&g| (2.0..7.0).contains(&g)));
            assert!(e.windows(2).all(|w| w[0] <= w[1]));
            e.len()
        })
        .collect();
    let c: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let (m, _) = mean_se(&c);
    assert!((m - 5.0).abs() < 4.0 * (5.0f64 / reps as f64).sqrt(), "mean count {m}");

    // χ² against Poisson(5) on 0..=11 and a ≥ 12 bin, df = 12
    let mut obs = [0f64; 13];
    for &n in &counts {
        obs[n.min(12)] += 1.0;
    }
    let mut pk = (-5.0f64).exp();
    let mut chi2 = 0.0;
    let mut rest = 1.0;
    for (k, o) in obs.iter().enumerate() {
        let p = if k == 12 { rest } else { pk };
        let e = p * reps as f64;
        chi2 += (o - e) * (o - e) / e;
        rest -= pk;
        pk *= 5.0 / (k + 1) as f64;
    }
    assert!(chi2 < 26.217, "chi2 = {chi2}");
}

#[test]
fn stable_tail_count() {
    // E #{x >= x0} = (C/α) x0^{-α}
    let (c, a, x0) = (0.7, 0.4, 0.05);
    let iv = Interval::above(1e-3).unwrap();
    let v: Vec<f64> = (0..10_000u64)
        .map(|i| {
            let s = sample_tempered_stable(c, a, 0.0, iv, &mut substream(12, i)).unwrap();
            s.iter().filter(|&&x| x >= x0).count() as f64
        })
        .collect();
    let (m, se) = mean_se(&v);
    let want = stable_tail(c, a, x0);
    assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
}

#[test]
fn tempered_stable_mean_matches_quadrature() {
    let iv = Interval::above(0.01).unwrap();
    let v: Vec<f64> = (0..10_000u64)
        .map(|i| sample_tempered_stable(1.0, 0.5, 1.0, iv, &mut substream(13, i)).unwrap().iter().sum())
        .collect();
    let (m, se) = mean_se(&v);
    let want = integrate_to_inf(|x| x.powf(-0.5) * (-x).exp(), 0.01, 1e-12, 0.0).unwrap().value;
    assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
}

#[test]
fn gamma_process_mean_is_analytic() {
    let iv = Interval::above(0.01).unwrap();
    let v: Vec<f64> = (0..10_000u64)
        .map(|i| sample_gamma_process(1.0, 1.0, iv, &mut substream(14, i)).unwrap().iter().sum())
        .collect();
    let (m, se) = mean_se(&v);
    assert!((m - (-0.01f64).exp()).abs() < 4.0 * se, "{m}");
}

#[test]
fn jump_times_are_uniform() {
    let sizes = vec![1.0; 100_000];
    let js = assign_times(&sizes, 2.0, &mut substream(15, 0)).unwrap();
    let t: Vec<f64> = js.records.iter().map(|r| r.time).collect();
    let (m, se) = mean_se(&t);
    assert!((m - 1.0).abs() < 4.0 * se);
    let d = ks_one_sample(&t, |x| x / 2.0).unwrap();
    assert!(d < 1.63 / (t.len() as f64).sqrt(), "KS {d}");
    assert!(assign_times(&[], 1.0, &mut substream(15, 1)).unwrap().is_empty());
}

#[test]
fn splitting_the_range_preserves_the_law() {
    let (a, b, c) = (0.001, 0.05, f64::INFINITY);
    let whole: Vec<f64> = (0..5_000u64)
        .map(|i| sample_tempered_stable(1.0, 0.5, 0.5, Interval::new(a, c).unwrap(), &mut substream(16, i)).unwrap().iter().sum())
        .collect();
    let split: Vec<f64> = (0..5_000u64)
        .map(|i| {
            let mut r = substream(17, i);
            let lo: f64 = sample_tempered_stable(1.0, 0.5, 0.5, Interval::new(a, b).unwrap(), &mut r).unwrap().iter().sum();
            let hi: f64 = sample_tempered_stable(1.0, 0.5, 0.5, Interval::new(b, c).unwrap(), &mut r).unwrap().iter().sum();
            lo + hi
        })
        .collect();
    let d = ks_two_sample(&whole, &split).unwrap();
    assert!(d < 1.63 * (2.0f64 / 5_000.0).sqrt(), "KS {d}");
}

proptest! {
    #[test]
    fn inverse_tails_decrease(c in 0.1f64..10.0, a in 0.05f64..0.95, b in 0.01f64..5.0, g in 0.01f64..50.0) {
        prop_assert!(ts_inverse_tail(c, a, g * 1.01) < ts_inverse_tail(c, a, g));
        prop_assert!(gamma_inverse_tail(c, b, g * 1.01) < gamma_inverse_tail(c, b, g));
    }

    #[test]
    fn thinning_keeps_a_descending_subset(seed in 0u64..1000, lo in 1e-4f64..0.1, width in 0.1f64..10.0) {
        let iv = Interval::new(lo, lo + width).unwrap();
        let mut counts = StageCounts::default();
        let ts = sample_tempered_stable_counted(1.0, 0.6, 2.0, iv, &mut substream(seed, 0), &mut counts).unwrap();
        prop_assert!(counts.accepted <= counts.proposed);
        prop_assert_eq!(counts.accepted as usize, ts.len());
        let mut gc = StageCounts::default();
        let ga = sample_gamma_process_counted(3.0, 0.5, iv, &mut substream(seed, 1), &mut gc).unwrap();
        prop_assert_eq!(gc.accepted as usize, ga.len());
        for v in [&ts, &ga] {
            prop_assert!(v.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(v.iter().all(|&x| iv.contains(x)));
        }
    }
}
