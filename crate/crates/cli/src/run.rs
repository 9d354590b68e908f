//! The three subcommands.
//!
//! Random streams: path i uses substream(seed, i); oracle batch j uses
//! substream(seed, ORACLE_STREAM + j); diagnostics row k uses
//! substream(seed, DIAGNOSTIC_STREAM + k).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ghlevy_core::envelope::{acceptance_lower_bound, bound_a, bound_b, optimize_z0, z1_max, EnvelopeConfig, Part};
use ghlevy_core::gh::GhSimulator;
use ghlevy_core::gig::{AcceptanceStats, ComponentKind, ComponentReport, GigSampler};
use ghlevy_core::oracle::{gh_pdf, gh_variate, ks_critical_value, ks_two_sample, qq_points};
use ghlevy_core::quad::integrate_log;
use ghlevy_core::rng::substream;
use ghlevy_core::specfun::scaled_hankel_sq;
use ghlevy_core::truncation::{gig_residual_bounds, TruncationConfig};
use ghlevy_core::GhParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, DiagnosticsConfig, MarginalConfig};

pub const ORACLE_STREAM: u64 = 1 << 63;
pub const DIAGNOSTIC_STREAM: u64 = 3 << 62;
const ORACLE_BATCH: usize = 10_000;

/// Everything a command needs after flags and config are merged.
pub struct Run {
    pub config: Config,
    pub seed: u64,
    pub out: PathBuf,
    pub params: GhParams,
    pub envelope: EnvelopeConfig,
}

impl Run {
    pub fn new(config: Config, seed: u64, out: PathBuf) -> Result<Self> {
        let params = config.params.resolve()?;
        let envelope = config.envelope.resolve(&params.gig)?;
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { config, seed, out, params, envelope })
    }

    fn tc(&self) -> &TruncationConfig {
        &self.config.truncation
    }

    fn csv(&self, name: &str) -> Result<csv::Writer<File>> {
        let path = self.out.join(name);
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.out.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        Ok(())
    }

    fn simulator(&self, horizon: f64) -> Result<GhSimulator> {
        Ok(GhSimulator::new(&self.params, self.tc(), &self.envelope, horizon)?)
    }

    /// W(T) for paths 0..n, in path order.
    fn endpoints(&self, n: usize) -> Result<Vec<f64>> {
        let sim = self.simulator(1.0)?;
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut r = substream(self.seed, i);
                Ok(sim.path(&mut r)?.endpoint(&mut r))
            })
            .collect()
    }

    fn oracle_draws(&self, n: usize) -> Result<Vec<f64>> {
        let batches: Vec<Vec<f64>> = (0..n.div_ceil(ORACLE_BATCH))
            .into_par_iter()
            .map(|j| {
                let mut r = substream(self.seed, ORACLE_STREAM + j as u64);
                let m = ORACLE_BATCH.min(n - j * ORACLE_BATCH);
                (0..m).map(|_| Ok(gh_variate(&self.params, &mut r)?)).collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(batches.concat())
    }
}

#[derive(Serialize)]
struct PathSummary {
    path_id: usize,
    n_jumps: usize,
    residual_drift: f64,
    residual_var: f64,
    components: Vec<ComponentReport>,
}

#[derive(Serialize)]
struct ComponentTotals {
    kind: ComponentKind,
    stats: AcceptanceStats,
    mean_eps_final: f64,
}

#[derive(Serialize)]
struct SimulateManifest<'a> {
    command: &'static str,
    seed: u64,
    params: &'a GhParams,
    truncation: &'a TruncationConfig,
    envelope: &'a EnvelopeConfig,
    horizon: f64,
    grid_points: usize,
    n_paths: usize,
    totals: Vec<ComponentTotals>,
    paths: Vec<PathSummary>,
}

pub fn simulate(run: &Run) -> Result<()> {
    let Some(sc) = &run.config.simulate else { bail!("simulate: missing \"simulate\" section") };
    let grid = sc.grid()?;
    let sim = run.simulator(sc.horizon)?;
    let rows: Vec<(Vec<f64>, PathSummary)> = (0..sc.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut r = substream(run.seed, i as u64);
            let path = sim.path(&mut r)?;
            let values = path.evaluate(&grid, &mut r)?;
            let summary = PathSummary {
                path_id: i,
                n_jumps: path.jumps.len(),
                residual_drift: path.residual_drift,
                residual_var: path.residual_var,
                components: path.components,
            };
            Ok((values, summary))
        })
        .collect::<Result<_>>()?;

    let mut w = run.csv("paths.csv")?;
    w.write_record(["path_id", "t", "value"])?;
    for (values, s) in &rows {
        for (t, v) in grid.iter().zip(values) {
            w.write_record([s.path_id.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;

    let paths: Vec<PathSummary> = rows.into_iter().map(|(_, s)| s).collect();
    let manifest = SimulateManifest {
        command: "simulate",
        seed: run.seed,
        params: &run.params,
        truncation: run.tc(),
        envelope: &run.envelope,
        horizon: sc.horizon,
        grid_points: grid.len(),
        n_paths: sc.n_paths,
        totals: totals(&paths),
        paths,
    };
    run.json("manifest.json", &manifest)?;
    log::info!("wrote {} paths to {}", sc.n_paths, run.out.display());
    Ok(())
}

fn totals(paths: &[PathSummary]) -> Vec<ComponentTotals> {
    let mut out: Vec<ComponentTotals> = Vec::new();
    for c in paths.iter().flat_map(|p| &p.components) {
        match out.iter_mut().find(|t| t.kind == c.kind) {
            Some(t) => {
                t.stats.merge(&c.stats);
                t.mean_eps_final += c.eps_final;
            }
            None => out.push(ComponentTotals { kind: c.kind, stats: c.stats, mean_eps_final: c.eps_final }),
        }
    }
    for t in &mut out {
        t.mean_eps_final /= paths.len() as f64;
    }
    out
}

#[derive(Serialize)]
struct MarginalReport<'a> {
    ks_statistic: f64,
    n: usize,
    time_per_sample_seconds: f64,
    params: &'a GhParams,
    tau: f64,
    #[serde(rename = "p_T")]
    p_t: f64,
    seed: u64,
    ks_critical_1pct: f64,
    envelope: &'a EnvelopeConfig,
}

/// Rounds to three significant figures.
fn sig3(x: f64) -> f64 {
    format!("{x:.2e}").parse().expect("formatted float parses")
}

pub fn marginal_test(run: &Run) -> Result<()> {
    let Some(mc) = &run.config.marginal_test else { bail!("marginal-test: missing \"marginal_test\" section") };
    let MarginalConfig { n, histogram_bins, qq_points: n_qq } = *mc;
    if n == 0 || histogram_bins == 0 || n_qq == 0 {
        bail!("marginal_test: n, histogram_bins and qq_points must be > 0");
    }
    let t = Instant::now();
    let sim = run.endpoints(n)?;
    let per_sample = t.elapsed().as_secs_f64() / n as f64;
    let oracle = run.oracle_draws(n)?;
    let report = MarginalReport {
        ks_statistic: ks_two_sample(&sim, &oracle)?,
        n,
        time_per_sample_seconds: sig3(per_sample),
        params: &run.params,
        tau: run.tc().tau,
        p_t: run.tc().p_t,
        seed: run.seed,
        ks_critical_1pct: ks_critical_value(0.01, n, n),
        envelope: &run.envelope,
    };
    run.json("report.json", &report)?;

    let mut sorted = oracle.clone();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[n / 200], sorted[(n - 1) - n / 200]);
    let width = (hi - lo) / histogram_bins as f64;
    let density = |v: &[f64]| {
        let mut c = vec![0usize; histogram_bins];
        for &x in v {
            if x >= lo && x < hi {
                c[(((x - lo) / width) as usize).min(histogram_bins - 1)] += 1;
            }
        }
        c.into_iter().map(|k| k as f64 / (v.len() as f64 * width)).collect::<Vec<_>>()
    };
    let (ds, dor) = (density(&sim), density(&oracle));
    let mut w = run.csv("histogram.csv")?;
    w.write_record(["bin_lo", "bin_hi", "simulated_density", "oracle_density", "gh_pdf"])?;
    for i in 0..histogram_bins {
        let a = lo + width * i as f64;
        let pdf = gh_pdf(&run.params, a + 0.5 * width)?;
        w.write_record([a, a + width, ds[i], dor[i], pdf].map(|x| x.to_string()))?;
    }
    w.flush()?;

    let mut w = run.csv("qq.csv")?;
    w.write_record(["p", "simulated", "oracle"])?;
    for (i, (a, b)) in qq_points(&sim, &oracle, n_qq)?.into_iter().enumerate() {
        let p = (i as f64 + 0.5) / n_qq as f64;
        w.write_record([p, a, b].map(|x| x.to_string()))?;
    }
    w.flush()?;
    log::info!("KS = {:.5} at n = {n}", report.ks_statistic);
    Ok(())
}

pub fn diagnostics(run: &Run) -> Result<()> {
    let dc = run.config.diagnostics.clone().unwrap_or_default();
    bound_table(run, &dc)?;
    acceptance_table(run, &dc)?;
    sandwich_table(run, &dc)?;
    Ok(())
}

fn bound_table(run: &Run, dc: &DiagnosticsConfig) -> Result<()> {
    if !(dc.z_min > 0.0 && dc.z_max > dc.z_min && dc.z_points >= 2) {
        bail!("diagnostics: need 0 < z_min < z_max and z_points >= 2");
    }
    let mut w = run.csv("bounds.csv")?;
    w.write_record(["nu", "z", "bound_a", "scaled_hankel_sq", "bound_b", "z1"])?;
    for &nu in &dc.nu {
        let (z1, h0) = if nu == 0.5 {
            (0.0, std::f64::consts::FRAC_2_PI)
        } else {
            let z1 = z1_max(nu)?;
            (z1, scaled_hankel_sq(nu, z1)?)
        };
        let step = (dc.z_max / dc.z_min).ln() / (dc.z_points - 1) as f64;
        for k in 0..dc.z_points {
            let z = dc.z_min * (step * k as f64).exp();
            let row = [nu, z, bound_a(z, nu, z1), scaled_hankel_sq(nu, z)?, bound_b(z, nu, z1.max(f64::MIN_POSITIVE), h0), z1];
            w.write_record(row.map(|x| x.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn acceptance_table(run: &Run, dc: &DiagnosticsConfig) -> Result<()> {
    let p = &run.params.gig;
    if p.nu() <= 0.5 {
        log::warn!("acceptance table needs |lambda| > 1/2; skipped");
        return Ok(());
    }
    let sampler = GigSampler::new(p, &run.envelope, Some(run.tc().beta0))?;
    let z1 = run.envelope.z1;
    let mut w = run.csv("acceptance.csv")?;
    w.write_record(["part", "x", "z0_opt", "bound_opt", "bound_z0_eq_z1", "empirical_rate", "proposals"])?;
    let rows: Vec<(Part, ComponentKind, f64)> = [(Part::N1, ComponentKind::N1), (Part::N2, ComponentKind::N2)]
        .into_iter()
        .flat_map(|(part, kind)| dc.x.iter().map(move |&x| (part, kind, x)))
        .collect();
    let results: Vec<Result<[f64; 4]>> = rows
        .par_iter()
        .enumerate()
        .map(|(k, &(part, kind, x))| {
            let (z0, bound) = optimize_z0(x, p, z1, part)?;
            let at_z1 = if z1 > 0.0 { acceptance_lower_bound(x, p, z1, z1, part)? } else { f64::NAN };
            let rate = match sampler.component(kind) {
                Some(mut c) => {
                    let mut r = substream(run.seed, DIAGNOSTIC_STREAM + k as u64);
                    for _ in 0..dc.proposals {
                        c.hankel_test(x, &mut r);
                    }
                    c.stats.hankel.rate()
                }
                None => f64::NAN,
            };
            Ok([z0, bound, at_z1, rate])
        })
        .collect();
    for ((part, _, x), res) in rows.iter().zip(results) {
        let [z0, bound, at_z1, rate] = res?;
        let label = if *part == Part::N1 { "N1" } else { "N2" };
        w.write_record([
            label.to_string(),
            x.to_string(),
            z0.to_string(),
            bound.to_string(),
            at_z1.to_string(),
            rate.to_string(),
            dc.proposals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn moment_quadrature(run: &Run, eps: f64, n: i32) -> Result<f64> {
    let p = run.params.gig;
    let mut err = None;
    let q = integrate_log(
        |x| match ghlevy_core::envelope::gig_levy_density(x, &p) {
            Ok(v) => x.powi(n) * v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        eps * 1e-12,
        eps,
        1e-8,
        0.0,
    )?;
    if let Some(e) = err {
        return Err(e.into());
    }
    Ok(q.value)
}

fn sandwich_table(run: &Run, dc: &DiagnosticsConfig) -> Result<()> {
    let mut w = run.csv("sandwich.csv")?;
    w.write_record(["eps", "mean_lower", "mean_quad", "mean_upper", "var_lower", "var_quad", "var_upper", "ordered"])?;
    for &eps in &dc.eps {
        let m = gig_residual_bounds(&run.params.gig, &run.envelope, eps, 1.0, 1.0, Some(run.tc().beta0))?;
        let (qm, qv) = (moment_quadrature(run, eps, 1)?, moment_quadrature(run, eps, 2)?);
        let s = 1.0 + 1e-6;
        let ordered = m.mean_lower <= qm * s && qm <= m.mean_upper * s && m.var_lower <= qv * s && qv <= m.var_upper * s;
        let mut row: Vec<String> = [eps, m.mean_lower, qm, m.mean_upper, m.var_lower, qv, m.var_upper].map(|x| x.to_string()).to_vec();
        row.push(ordered.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn output_dir(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"))
}
