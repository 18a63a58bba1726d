//! The experiment commands. Each writes CSV/JSON files plus `metadata.json`
//! into the output directory and reports whether its checks passed.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::apps::{
    download_laplace, download_laplace_with, find_gamma_star, find_gamma_star_with,
    fluid_busy_laplace_estimate, hetnet_load_factor, hetnet_on_stats, level_set_rho1, load_factor,
    simulate_download, simulate_fluid_busy, simulate_hetnet_coverage, EmpiricalLaplace,
    StreamingConfig, GAMMA_RANGE,
};
use crate::error::{Error, Result};
use crate::geometry::{query_padding, sample_poisson_points, FieldSample, Point};
use crate::mginf::{rescale_high, rescale_low_radius, MGInfParams};
use crate::model::{linear_to_db, NetworkModel};
use crate::rng::{tag, SeedStream};
use crate::sharedrate::{
    conditional_zero_sharing, sample_snapshot, shared_rate_trace, tail_exponent_high,
    variance_decomposition,
};
use crate::sharing::{
    cox_mean_sharing, expected_jm_area, jm_crossing_intensity, jm_edge_crossings,
    sample_cox_sharing, sharing_trace, upper_sharing_trace, SharingKind,
};
use crate::stats::{ecdf, ks_test_exp1, mc_harness, ratio_estimate, KsReport, Summary};
use crate::trace::interarrival::{
    coverage_interarrivals, fading_dead_time, fading_interarrivals, normalize_by_mean,
    radius_for_load, sinr_interarrivals,
};
use crate::trace::{
    exact_crossings, interference_radius, simulate_coverage, sinr_trace, snr_trace, CrossingRecord,
    TraceMetadata, Track, Trajectory,
};

use super::config::{ExperimentConfig, SCHEMA_VERSION};

/// Outcome of a command's statistical checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Resolved configuration shared by every command.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub model: NetworkModel,
    pub seeds: SeedStream,
    pub out: PathBuf,
}

impl Context {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let model = cfg.model.build()?;
        Ok(Self {
            seeds: SeedStream::new(cfg.seed),
            out: cfg.output.clone(),
            model,
            cfg,
        })
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        let p = self.out.join(name);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        Ok(p)
    }

    fn file(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name)?)?))
    }

    fn gamma(&self) -> Result<f64> {
        Ok(self.cfg.thresholds.linear()?[0])
    }

    fn trajectory(&self, duration: f64) -> Result<Trajectory> {
        let h = self.cfg.trajectory.heading_deg.to_radians();
        Trajectory::new(
            Point::new(0.0, 0.0),
            Point::new(h.cos(), h.sin()),
            self.model.velocity,
            duration,
        )
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        serde_json::to_writer_pretty(self.file(name)?, value)?;
        Ok(())
    }

    fn write_table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.file(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_metadata(&self, command: &str, extra: serde_json::Value) -> Result<()> {
        self.write_json(
            "metadata.json",
            &json!({
                "schema_version": SCHEMA_VERSION,
                "crate_version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "scenario": self.cfg.scenario,
                "seed": self.cfg.seed,
                "replications": self.cfg.replications,
                "config": self.cfg,
                "details": extra,
            }),
        )
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

/// Traces of one trajectory at the first configured threshold.
pub fn trace(ctx: &Context) -> Result<Status> {
    let m = &ctx.model;
    let cfg = &ctx.cfg;
    let gamma = ctx.gamma()?;
    let r = m.coverage_radius(gamma)?;
    let dt = cfg.trajectory.dt;
    let traj = ctx.trajectory(cfg.trajectory.duration)?;
    let r_int = cfg
        .sinr
        .interference_radius
        .unwrap_or_else(|| interference_radius(r, m.node_intensity));
    let mut pad = query_padding(r, m.node_intensity);
    if cfg.sinr.enabled {
        pad = pad.max(r_int);
    }
    let field_seed = ctx.seeds.substream(tag("field")).seed(0);
    let window = traj.window(pad)?;
    let field = FieldSample::sample(m.node_intensity, m.user_intensity, window, field_seed)?;
    let track = Track::new(&field.nodes, traj);

    let fading = cfg.fading.model()?;
    let mut fade_rng = ctx.seeds.substream(tag("fading")).rng(0);
    let snr = snr_trace(&track, m, dt, fading, &mut fade_rng)?;
    snr.write_csv(ctx.file("snr.csv")?, "snr")?;
    let crossings = if fading.is_none() {
        exact_crossings(&field.nodes, &traj, r, gamma)
    } else {
        CrossingRecord::from_sampled(&snr, gamma)
    };
    crossings.write_csv(ctx.file("crossings.csv")?)?;

    let handoffs: Vec<Vec<String>> = track
        .handoffs()
        .iter()
        .map(|h| {
            vec![
                num(h.time),
                h.from.to_string(),
                h.to.to_string(),
                num(h.distance),
            ]
        })
        .collect();
    ctx.write_table(
        "handoffs.csv",
        &["time", "from", "to", "distance"],
        &handoffs,
    )?;

    sharing_trace(&field, &track, r).write_csv(ctx.file("sharing.csv")?)?;
    upper_sharing_trace(&field, &track, r).write_csv(ctx.file("sharing_upper.csv")?)?;
    shared_rate_trace(&field, &track, m, gamma, dt, SharingKind::Exact)?
        .write_csv(ctx.file("shared_rate.csv")?)?;

    if cfg.sinr.enabled {
        let sinr = sinr_trace(&field, &track, m, dt, r_int, None)?;
        sinr.write_csv(ctx.file("sinr.csv")?, "sinr")?;
        CrossingRecord::from_sampled(&sinr, gamma).write_csv(ctx.file("sinr_crossings.csv")?)?;
    }
    field.save(&ctx.path("field.csv")?)?;

    let meta = TraceMetadata {
        seed: field_seed,
        window,
        pad,
        dt,
        scan_resolution: None,
    };
    ctx.write_metadata(
        "trace",
        json!({
            "trace": meta,
            "gamma": gamma,
            "radius": r,
            "fading": fading,
            "interference_radius": cfg.sinr.enabled.then_some(r_int),
            "nodes": field.nodes.len(),
            "users": field.users.len(),
        }),
    )?;
    Ok(Status::Pass)
}

/// One closed form against its Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub quantity: String,
    pub closed_form: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub z: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(
        quantity: impl Into<String>,
        closed_form: f64,
        estimate: f64,
        std_err: f64,
        k: f64,
    ) -> Self {
        let z = (estimate - closed_form) / std_err;
        Self {
            quantity: quantity.into(),
            closed_form,
            estimate,
            std_err,
            z,
            pass: z.abs() <= k,
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.quantity.clone(),
            num(self.closed_form),
            num(self.estimate),
            num(self.std_err),
            num(self.z),
            self.pass.to_string(),
        ]
    }
}

const CHECK_HEADER: [&str; 6] = [
    "quantity",
    "closed_form",
    "estimate",
    "std_err",
    "z",
    "pass",
];
/// Factor applied to the perturbed closed form in the validation self-test.
const PERTURBATION: f64 = 1.25;

#[derive(Debug, Clone, Copy, Default)]
struct ValidationRep {
    on_fraction: f64,
    on: (f64, f64),
    off: (f64, f64),
    maxima: f64,
    handoffs: f64,
    jm: f64,
}

fn sum_count(xs: &[f64]) -> (f64, f64) {
    (xs.iter().sum(), xs.len() as f64)
}

/// Every closed form of the coverage, handoff and two-tier processes against
/// Monte Carlo at 3 s.e. `perturb` names a row whose closed form is scaled by
/// 1.25 to exercise failure detection.
pub fn validate(ctx: &Context, perturb: Option<&str>) -> Result<Status> {
    let m = &ctx.model;
    let cfg = &ctx.cfg;
    let gamma = ctx.gamma()?;
    let r = m.coverage_radius(gamma)?;
    let lam = m.node_intensity;
    let duration = cfg.trajectory.duration;
    let reps = cfg.replications;
    let params = MGInfParams::for_model(m, r)?;

    let stats = collect(mc_harness(
        reps,
        ctx.seeds.substream(tag("validate")),
        |_, rng| {
            let traj = ctx.trajectory(duration)?;
            let w = traj.padded_window(r, lam)?;
            let field =
                FieldSample::from_points(sample_poisson_points(lam, &w, rng)?, Vec::new(), w, 0);
            let track = Track::new(&field.nodes, traj);
            let rec = CrossingRecord::from_intervals(gamma, &track.level_set(|_| r), 0.0, duration);
            Ok(ValidationRep {
                on_fraction: rec.on_fraction(),
                on: sum_count(&rec.on_durations()),
                off: sum_count(&rec.off_durations()),
                maxima: track.interior_maxima().len() as f64,
                handoffs: track.handoff_times().len() as f64,
                jm: jm_edge_crossings(&field, &track, r, SharingKind::Exact).crossings as f64,
            })
        },
    ))?;

    let mean_of = |f: &dyn Fn(&ValidationRep) -> f64| {
        Summary::from_slice(&stats.iter().map(f).collect::<Vec<_>>())
    };
    let mut rows = Vec::new();
    let push_summary = |rows: &mut Vec<CheckRow>, name: &str, cf: f64, s: Summary| {
        rows.push(CheckRow::new(name, cf, s.mean, s.std_err(), 3.0));
    };
    let push_ratio = |rows: &mut Vec<CheckRow>, name: &str, cf: f64, pairs: Vec<(f64, f64)>| {
        let e = ratio_estimate(&pairs);
        rows.push(CheckRow::new(name, cf, e.value, e.std_err, 3.0));
    };
    push_summary(
        &mut rows,
        "p_on",
        params.on_probability(),
        mean_of(&|s| s.on_fraction),
    );
    push_ratio(
        &mut rows,
        "idle_mean",
        params.idle_mean(),
        stats.iter().map(|s| s.off).collect(),
    );
    push_ratio(
        &mut rows,
        "busy_mean",
        params.busy_mean(),
        stats.iter().map(|s| s.on).collect(),
    );
    push_summary(
        &mut rows,
        "maxima_intensity",
        m.velocity * lam.sqrt(),
        mean_of(&|s| s.maxima / duration),
    );
    push_summary(
        &mut rows,
        "handoff_intensity",
        4.0 * m.velocity * lam.sqrt() / PI,
        mean_of(&|s| s.handoffs / duration),
    );
    push_summary(
        &mut rows,
        "jm_crossing_intensity",
        jm_crossing_intensity(lam, m.velocity, r),
        mean_of(&|s| s.jm / duration),
    );

    for &ratio in &cfg.hetnet.micro_over_macro {
        let h = cfg.hetnet.model(m, ratio)?;
        let cf = hetnet_on_stats(&h, gamma)?;
        let label = format!("hetnet-{ratio}");
        let recs = collect(mc_harness(
            reps,
            ctx.seeds.substream(tag(&label)),
            |_, rng| simulate_hetnet_coverage(&h, gamma, cfg.hetnet.duration, rng),
        ))?;
        let p = Summary::from_slice(&recs.iter().map(|r| r.on_fraction()).collect::<Vec<_>>());
        push_summary(&mut rows, &format!("hetnet_p_on[{ratio}]"), cf.p_on, p);
        push_ratio(
            &mut rows,
            &format!("hetnet_mean_on[{ratio}]"),
            cf.mean_on,
            recs.iter().map(|r| sum_count(&r.on_durations())).collect(),
        );
        push_ratio(
            &mut rows,
            &format!("hetnet_mean_off[{ratio}]"),
            cf.mean_off,
            recs.iter().map(|r| sum_count(&r.off_durations())).collect(),
        );
    }

    if let Some(name) = perturb {
        let row = rows
            .iter_mut()
            .find(|r| r.quantity == name)
            .ok_or_else(|| Error::Config(format!("no validation row named `{name}`")))?;
        *row = CheckRow::new(
            row.quantity.clone(),
            row.closed_form * PERTURBATION,
            row.estimate,
            row.std_err,
            3.0,
        );
    }

    let cells: Vec<Vec<String>> = rows.iter().map(CheckRow::cells).collect();
    ctx.write_table("validate.csv", &CHECK_HEADER, &cells)?;
    ctx.write_json("validate.json", &rows)?;
    for r in &rows {
        println!(
            "{:<24} closed {:>12.6e}  mc {:>12.6e} ± {:>9.3e}  z {:>6.2}  {}",
            r.quantity,
            r.closed_form,
            r.estimate,
            r.std_err,
            r.z,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    ctx.write_metadata(
        "validate",
        json!({ "gamma": gamma, "radius": r, "duration": duration, "perturbed": perturb }),
    )?;
    Ok(Status::from_bool(rows.iter().all(|r| r.pass)))
}

/// One K-S test of rescaled interarrivals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub pipeline: String,
    /// Fading variance, path-loss exponent or load, depending on the pipeline.
    pub parameter: f64,
    pub gamma: f64,
    pub gamma_db: f64,
    pub radius: f64,
    pub n: usize,
    pub d: f64,
    pub critical: f64,
    pub pass: bool,
    pub note: String,
}

/// K-S reports of rescaled up-crossing interarrivals across the threshold
/// grid: f(γ)·V exactly, g(γ)·V at the configured loads, the faded SNR with
/// suppressed crossings and the SINR. Fails only if the highest threshold of
/// the exact pipeline fails.
pub fn asymptotics(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let cfg = &ctx.cfg;
    let a = &cfg.asymptotics;
    let grid = cfg.thresholds.linear()?;
    let dt = cfg.trajectory.dt;
    let mut rows: Vec<AsymptoticRow> = Vec::new();

    let mut record = |ctx: &Context,
                      pipeline: &str,
                      parameter: f64,
                      gamma: f64,
                      radius: f64,
                      samples: Result<Vec<f64>>|
     -> Result<()> {
        let label = format!(
            "{pipeline}-{parameter}-{}",
            rows.iter().filter(|r| r.pipeline == pipeline).count()
        );
        let (report, note): (Option<KsReport>, String) =
            match samples.and_then(|xs| Ok((ks_test_exp1(&xs)?, xs))) {
                Ok((r, xs)) => {
                    if a.ecdf {
                        let pts: Vec<Vec<String>> = ecdf(&xs)
                            .into_iter()
                            .map(|(x, f)| vec![num(x), num(f), num(-(-x).exp_m1())])
                            .collect();
                        ctx.write_table(
                            &format!("ecdf/{label}.csv"),
                            &["x", "empirical", "exp1"],
                            &pts,
                        )?;
                    }
                    (Some(r), String::new())
                }
                Err(Error::InsufficientData(msg)) => (None, format!("too few crossings: {msg}")),
                Err(e) => return Err(e),
            };
        rows.push(AsymptoticRow {
            pipeline: pipeline.into(),
            parameter,
            gamma,
            gamma_db: linear_to_db(gamma),
            radius,
            n: report.as_ref().map_or(0, |r| r.n),
            d: report.as_ref().map_or(f64::NAN, |r| r.d),
            critical: report.as_ref().map_or(f64::NAN, |r| r.critical),
            pass: report.as_ref().is_some_and(|r| r.pass),
            note,
        });
        Ok(())
    };

    for (k, &g) in grid.iter().enumerate() {
        let r = m.coverage_radius(g)?;
        let f = rescale_high(&m, g)?;
        let xs = coverage_interarrivals(
            &m,
            r,
            a.samples,
            ctx.seeds.substream(tag(&format!("snr-{k}"))),
        )
        .map(|xs| xs.iter().map(|x| x * f).collect());
        record(ctx, "snr", m.pathloss_exponent, g, r, xs)?;
    }
    for (k, &load) in a.low_loads.iter().enumerate() {
        let r = radius_for_load(&m, load);
        let g = m.gamma_for_radius(r)?;
        let scale = rescale_low_radius(&m, r);
        let xs = coverage_interarrivals(
            &m,
            r,
            a.low_samples,
            ctx.seeds.substream(tag(&format!("low-{k}"))),
        )
        .map(|xs| xs.iter().map(|x| x * scale).collect());
        record(ctx, "low", load, g, r, xs)?;
    }
    for (i, &var) in cfg.fading.sweep_variances.iter().enumerate() {
        let fading = cfg.fading.sweep_model(var)?;
        for (k, &g) in grid.iter().enumerate() {
            let seeds = ctx.seeds.substream(tag(&format!("fading-{i}-{k}")));
            let xs = fading_interarrivals(
                &m,
                g,
                fading,
                dt,
                fading_dead_time(&m, g)?,
                a.samples,
                seeds,
            )
            .map(|xs| normalize_by_mean(&xs));
            record(ctx, "fading", var, g, m.coverage_radius(g)?, xs)?;
        }
    }
    for (i, &beta) in cfg.sinr.betas.iter().enumerate() {
        let mut mb = m;
        mb.pathloss_exponent = beta;
        for (k, &g) in grid.iter().enumerate() {
            let f = rescale_high(&mb, g)?;
            let seeds = ctx.seeds.substream(tag(&format!("sinr-{i}-{k}")));
            let xs = sinr_interarrivals(&mb, g, dt, a.samples, seeds)
                .map(|xs| xs.iter().map(|x| x * f).collect());
            record(ctx, "sinr", beta, g, mb.coverage_radius(g)?, xs)?;
        }
    }

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.pipeline.clone(),
                num(r.parameter),
                num(r.gamma),
                num(r.gamma_db),
                num(r.radius),
                r.n.to_string(),
                num(r.d),
                num(r.critical),
                r.pass.to_string(),
                r.note.clone(),
            ]
        })
        .collect();
    ctx.write_table(
        "ks.csv",
        &[
            "pipeline",
            "parameter",
            "gamma",
            "gamma_db",
            "radius",
            "n",
            "d",
            "critical",
            "pass",
            "note",
        ],
        &cells,
    )?;

    // Smallest grid threshold from which every larger one passes.
    let mut thresholds = Vec::new();
    for pipeline in ["snr", "fading", "sinr"] {
        let mut params: Vec<f64> = rows
            .iter()
            .filter(|r| r.pipeline == pipeline)
            .map(|r| r.parameter)
            .collect();
        params.dedup();
        for p in params {
            let sel: Vec<&AsymptoticRow> = rows
                .iter()
                .filter(|r| r.pipeline == pipeline && r.parameter == p)
                .collect();
            let k = sel.iter().rposition(|r| !r.pass).map_or(0, |k| k + 1);
            thresholds.push(json!({
                "pipeline": pipeline,
                "parameter": p,
                "pass_threshold": sel.get(k).map(|r| r.gamma),
                "pass_threshold_db": sel.get(k).map(|r| r.gamma_db),
            }));
        }
    }
    for r in &rows {
        println!(
            "{:<7} {:>7} γ {:>8.2} dB  n {:>5}  D {:.4} / {:.4}  {}{}",
            r.pipeline,
            r.parameter,
            r.gamma_db,
            r.n,
            r.d,
            r.critical,
            if r.pass { "pass" } else { "fail" },
            if r.note.is_empty() {
                String::new()
            } else {
                format!(" ({})", r.note)
            }
        );
    }
    ctx.write_json(
        "report.json",
        &json!({ "rows": rows, "pass_thresholds": thresholds }),
    )?;
    ctx.write_metadata("asymptotics", json!({ "grid": grid }))?;
    let top_passes = rows
        .iter()
        .filter(|r| r.pipeline == "snr")
        .max_by(|a, b| a.gamma.total_cmp(&b.gamma))
        .is_some_and(|r| r.pass);
    Ok(Status::from_bool(top_passes))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Load-factor curves ρ(γ), their maximizers γ* and the ρ(γ*, ξ) = 1 level
/// set. Fails if a curve with more users rises above one with fewer.
pub fn streaming(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let s = &ctx.cfg.streaming;
    let lam = m.node_intensity;
    let base = StreamingConfig::new(m, s.playback_rate)?;
    let gammas = log_grid(s.gamma_range[0], s.gamma_range[1], s.gamma_points);
    let mut curves = Vec::new();
    let mut stars = Vec::new();
    let mut rho_by_density = Vec::new();
    for &k in &s.xi_over_lambda {
        let c = base.with_user_intensity(k * lam);
        let rho = gammas
            .iter()
            .map(|&g| load_factor(g, &c))
            .collect::<Result<Vec<_>>>()?;
        for (&g, &r) in gammas.iter().zip(&rho) {
            curves.push(vec![num(k), num(g), num(linear_to_db(g)), num(r)]);
        }
        rho_by_density.push((k, rho));
        let gs = find_gamma_star(&c)?;
        println!(
            "ξ = {k}λ: γ* = {:.4e} ({:.2} dB), ρ(γ*) = {:.6}",
            gs.gamma,
            linear_to_db(gs.gamma),
            gs.rho
        );
        stars.push(vec![
            num(k),
            num(gs.gamma),
            num(linear_to_db(gs.gamma)),
            num(gs.rho),
        ]);
    }
    ctx.write_table(
        "streaming_curves.csv",
        &["xi_over_lambda", "gamma", "gamma_db", "rho"],
        &curves,
    )?;
    ctx.write_table(
        "gamma_star.csv",
        &["xi_over_lambda", "gamma_star", "gamma_star_db", "rho_star"],
        &stars,
    )?;

    if !s.level_set_users.is_empty() {
        let [lo, hi] = s.level_set_node_range;
        let points = level_set_rho1(&base, &s.level_set_users, lo, hi);
        let rows: Vec<Vec<String>> = s
            .level_set_users
            .iter()
            .zip(points)
            .map(|(&xi, p)| match p {
                Ok(p) => vec![
                    num(xi),
                    num(p.node_intensity),
                    num(p.gamma_star),
                    num(p.rho),
                    String::new(),
                ],
                Err(e) => vec![
                    num(xi),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ],
            })
            .collect();
        ctx.write_table(
            "level_set.csv",
            &[
                "user_intensity",
                "node_intensity",
                "gamma_star",
                "rho",
                "note",
            ],
            &rows,
        )?;
    }
    // Fewer competing users never lowers the load factor.
    rho_by_density.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ordered = rho_by_density.windows(2).all(|w| {
        w[0].1
            .iter()
            .zip(&w[1].1)
            .all(|(lo, hi)| *lo >= *hi * (1.0 - 1e-12))
    });
    println!(
        "curves ordered by user density: {}",
        if ordered { "yes" } else { "NO" }
    );
    ctx.write_metadata(
        "streaming",
        json!({ "b": base.b(), "gamma_search_range": GAMMA_RANGE, "curves_ordered": ordered }),
    )?;
    Ok(Status::from_bool(ordered))
}

/// Transform and simulated value of E[e^{−sX}].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformRow {
    pub label: String,
    pub s: f64,
    pub transform: f64,
    pub transform_se: f64,
    pub simulated: f64,
    pub simulated_se: f64,
    pub agree: bool,
}

fn on_interval_runs(
    ctx: &Context,
    label: &str,
    radius: f64,
    horizon: f64,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let m = &ctx.model;
    collect(mc_harness(
        ctx.cfg.replications,
        ctx.seeds.substream(tag(label)),
        |_, rng| {
            let rec = simulate_coverage(m.node_intensity, m.velocity, radius, horizon, rng)?;
            let mut iv = rec.on_intervals();
            // The first interval is censored on the left.
            if rec.initially_on && !iv.is_empty() {
                iv.remove(0);
            }
            Ok(iv)
        },
    ))
}

fn durations(runs: &[Vec<(f64, f64)>]) -> Vec<f64> {
    runs.iter()
        .flat_map(|iv| iv.iter().map(|(a, b)| b - a))
        .collect()
}

/// Download-time and fluid busy-period transforms from busy-period samples,
/// compared with direct simulation at 2 combined s.e.
pub fn download(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let cfg = &ctx.cfg;
    let horizon = cfg.download.horizon;
    let r = m.coverage_radius(ctx.gamma()?)?;
    let idle_rate = MGInfParams::for_model(&m, r)?.idle_law().rate;
    let busy = EmpiricalLaplace::new(durations(&on_interval_runs(
        ctx,
        "download-busy",
        r,
        horizon,
    )?))?;
    let runs = on_interval_runs(ctx, "download-runs", r, horizon)?;
    let mut rows = Vec::new();
    for (k, &[delta, kappa]) in cfg.download.pairs.iter().enumerate() {
        let mut rng = ctx.seeds.substream(tag("download-files")).rng(k as u64);
        let mut times = Vec::new();
        for iv in &runs {
            times.extend(simulate_download(iv, delta, kappa, &mut rng)?);
        }
        let direct = EmpiricalLaplace::new(times)?;
        let at_zero = download_laplace_with(0.0, delta, kappa, idle_rate, |x| busy.value(x))?;
        rows.push(TransformRow {
            label: format!("download[delta={delta};kappa={kappa}]"),
            s: 0.0,
            transform: at_zero,
            transform_se: 0.0,
            simulated: 1.0,
            simulated_se: 0.0,
            agree: (at_zero - 1.0).abs() < 1e-12,
        });
        for &s in cfg.download.s.iter().filter(|&&s| s > 0.0) {
            let t = download_laplace(s, delta, kappa, idle_rate, &busy)?;
            let d = direct.estimate(s);
            rows.push(TransformRow {
                label: format!("download[delta={delta};kappa={kappa}]"),
                s,
                transform: t.value,
                transform_se: t.std_err,
                simulated: d.value,
                simulated_se: d.std_err,
                agree: t.agrees_with(&d, 2.0),
            });
        }
    }

    let f = &cfg.fluid;
    let rf = radius_for_load(&m, f.load);
    let idle_f = MGInfParams::for_model(&m, rf)?.idle_law().rate;
    let busy_f = EmpiricalLaplace::new(durations(&on_interval_runs(
        ctx,
        "fluid-busy",
        rf,
        horizon,
    )?))?;
    let fluid: Vec<f64> = on_interval_runs(ctx, "fluid-runs", rf, horizon)?
        .iter()
        .flat_map(|iv| simulate_fluid_busy(iv, f.sigma))
        .collect();
    let direct_f = EmpiricalLaplace::new(fluid)?;
    for &s in &f.s {
        let t = fluid_busy_laplace_estimate(s, f.sigma, idle_f, &busy_f)?;
        let d = direct_f.estimate(s);
        rows.push(TransformRow {
            label: format!("fluid[sigma={};load={}]", f.sigma, f.load),
            s,
            transform: t.value,
            transform_se: t.std_err,
            simulated: d.value,
            simulated_se: d.std_err,
            agree: t.agrees_with(&d, 2.0),
        });
    }

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                num(r.s),
                num(r.transform),
                num(r.transform_se),
                num(r.simulated),
                num(r.simulated_se),
                r.agree.to_string(),
            ]
        })
        .collect();
    ctx.write_table(
        "transforms.csv",
        &[
            "series",
            "s",
            "transform",
            "transform_se",
            "simulated",
            "simulated_se",
            "agree",
        ],
        &cells,
    )?;
    for r in &rows {
        println!(
            "{:<40} s {:<5} transform {:.5} ± {:.5}  simulated {:.5} ± {:.5}  {}",
            r.label,
            r.s,
            r.transform,
            r.transform_se,
            r.simulated,
            r.simulated_se,
            if r.agree { "agree" } else { "DISAGREE" }
        );
    }
    ctx.write_metadata(
        "download",
        json!({ "radius": r, "idle_rate": idle_rate, "fluid_radius": rf, "busy_samples": busy.samples.len() }),
    )?;
    Ok(Status::from_bool(rows.iter().all(|r| r.agree)))
}

/// Mean sharing number of road (Cox) users against Poisson users of equal
/// planar density. Passes if Monte Carlo matches the Cox mean at 3 s.e. and
/// the Cox mean is the larger.
pub fn cox(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let cfg = &ctx.cfg;
    let r = m.coverage_radius(ctx.gamma()?)?;
    let lam = m.node_intensity;
    let area = expected_jm_area(lam, r)?;
    let lt = cfg.cox.line_user_intensity;
    let mut rows = Vec::new();
    let mut ok = true;
    for (k, &lr) in cfg.cox.line_intensity.iter().enumerate() {
        let planar = PI * lr * lt;
        let formula = cox_mean_sharing(lr, lt, lam, r)?;
        let mc = collect(mc_harness(
            cfg.replications,
            ctx.seeds.substream(tag("cox")).substream(k as u64),
            |_, rng| sample_cox_sharing(lr, lt, lam, r, rng).map(f64::from),
        ))?;
        let s = Summary::from_slice(&mc);
        let pass = s.within(formula, 3.0) && formula > planar * area;
        ok &= pass;
        println!(
            "λ_r {lr:.3e}: Cox {formula:.4} (mc {:.4} ± {:.4}), Poisson {:.4}",
            s.mean,
            s.std_err(),
            planar * area
        );
        rows.push(vec![
            num(lr),
            num(lt),
            num(planar),
            num(formula),
            num(planar * area),
            num(s.mean),
            num(s.std_err()),
            pass.to_string(),
        ]);
    }
    ctx.write_table(
        "cox.csv",
        &[
            "line_intensity",
            "line_user_intensity",
            "planar_intensity",
            "cox_mean",
            "poisson_mean",
            "mc_mean",
            "mc_std_err",
            "pass",
        ],
        &rows,
    )?;
    ctx.write_metadata("cox", json!({ "radius": r, "expected_cell_area": area }))?;
    Ok(Status::from_bool(ok))
}

/// Two-tier coverage statistics and streaming optimum against micro density.
pub fn hetnet(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let cfg = &ctx.cfg;
    let h_cfg = &cfg.hetnet;
    let gamma = ctx.gamma()?;
    let lam = m.node_intensity;
    let mut rows = Vec::new();
    let mut ok = true;
    for &ratio in &h_cfg.micro_over_macro {
        let h = h_cfg.model(&m, ratio)?;
        let cf = hetnet_on_stats(&h, gamma)?;
        let recs = collect(mc_harness(
            cfg.replications,
            ctx.seeds.substream(tag(&format!("hetnet-{ratio}"))),
            |_, rng| simulate_hetnet_coverage(&h, gamma, h_cfg.duration, rng),
        ))?;
        let p = Summary::from_slice(&recs.iter().map(|r| r.on_fraction()).collect::<Vec<_>>());
        let on = ratio_estimate(
            &recs
                .iter()
                .map(|r| sum_count(&r.on_durations()))
                .collect::<Vec<_>>(),
        );
        let off = ratio_estimate(
            &recs
                .iter()
                .map(|r| sum_count(&r.off_durations()))
                .collect::<Vec<_>>(),
        );
        let checks = [
            CheckRow::new("p_on", cf.p_on, p.mean, p.std_err(), 3.0),
            CheckRow::new("mean_on", cf.mean_on, on.value, on.std_err, 3.0),
            CheckRow::new("mean_off", cf.mean_off, off.value, off.std_err, 3.0),
        ];
        for c in checks {
            ok &= c.pass;
            println!(
                "λ̂/λ {ratio:<6} {:<9} closed {:>10.5} mc {:>10.5} ± {:.5}  {}",
                c.quantity,
                c.closed_form,
                c.estimate,
                c.std_err,
                if c.pass { "pass" } else { "FAIL" }
            );
            let mut cells = vec![num(ratio)];
            cells.extend(c.cells());
            rows.push(cells);
        }
    }
    let header = [
        "micro_over_macro",
        "quantity",
        "closed_form",
        "estimate",
        "std_err",
        "z",
        "pass",
    ];
    ctx.write_table("hetnet.csv", &header, &rows)?;

    let mut sweep = Vec::new();
    let mut star_rows = Vec::new();
    for ratio in log_grid(
        h_cfg.sweep_range[0],
        h_cfg.sweep_range[1],
        h_cfg.sweep_points,
    ) {
        let h = h_cfg.model(&m, ratio)?;
        let cf = hetnet_on_stats(&h, gamma)?;
        sweep.push(vec![
            num(ratio),
            num(cf.p_on),
            num(cf.mean_on),
            num(cf.mean_off),
        ]);
        for &k in &cfg.streaming.xi_over_lambda {
            let xi = k * lam;
            let star = find_gamma_star_with(
                |g| hetnet_load_factor(g, &h, xi, m.bandwidth_const, cfg.streaming.playback_rate),
                GAMMA_RANGE.0,
                GAMMA_RANGE.1,
            );
            star_rows.push(match star {
                Ok(s) => vec![num(ratio), num(k), num(s.gamma), num(s.rho), String::new()],
                Err(e) => vec![
                    num(ratio),
                    num(k),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ],
            });
        }
    }
    ctx.write_table(
        "hetnet_sweep.csv",
        &["micro_over_macro", "p_on", "mean_on", "mean_off"],
        &sweep,
    )?;
    ctx.write_table(
        "hetnet_gamma_star.csv",
        &[
            "micro_over_macro",
            "xi_over_lambda",
            "gamma_star",
            "rho_star",
            "note",
        ],
        &star_rows,
    )?;
    ctx.write_metadata(
        "hetnet",
        json!({ "gamma": gamma, "radii": h_cfg.model(&m, 1.0)?.radii(gamma)? }),
    )?;
    Ok(Status::from_bool(ok))
}

const SNAPSHOT_CHUNK: usize = 100_000;

/// (S, N) pairs from `n` snapshots, drawn in fixed-size chunks so the result
/// does not depend on the worker count.
fn snapshot_pairs(
    ctx: &Context,
    label: &str,
    xi: f64,
    radius: f64,
    n: usize,
) -> Result<Vec<(f64, u32)>> {
    let m = &ctx.model;
    let chunks = n.div_ceil(SNAPSHOT_CHUNK) as u64;
    let parts = collect(mc_harness(
        chunks,
        ctx.seeds.substream(tag(label)),
        |i, rng| {
            let len = SNAPSHOT_CHUNK.min(n - i as usize * SNAPSHOT_CHUNK);
            (0..len)
                .map(|_| {
                    let snap = sample_snapshot(m.node_intensity, xi, radius, rng)?;
                    Ok((snap.shared(m, radius, SharingKind::Exact), snap.n_exact))
                })
                .collect::<Result<Vec<_>>>()
        },
    ))?;
    Ok(parts.concat())
}

/// Stationary shared-rate study: tail exponent of S against 2/β (20%),
/// P(N = 0 | S > s) and var(S) against user density.
pub fn sharedrate(ctx: &Context) -> Result<Status> {
    let m = ctx.model;
    let sr = &ctx.cfg.sharedrate;
    let gamma = ctx.gamma()?;
    let r = m.coverage_radius(gamma)?;
    let lam = m.node_intensity;
    if !(m.user_intensity > 0.0) {
        return Err(Error::Config(
            "sharedrate needs model.user_intensity > 0".into(),
        ));
    }

    let pairs = snapshot_pairs(ctx, "tail", m.user_intensity, r, sr.samples)?;
    let shared: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tail = tail_exponent_high(&shared, sr.tail_points)?;
    let target = 2.0 / m.pathloss_exponent;
    let slope_ok = (tail.slope / target - 1.0).abs() <= 0.2;
    tail.write_json(ctx.file("tail.json")?)?;
    println!(
        "tail slope {:.4} ± {:.4} (target {target}) from {} snapshots: {}",
        tail.slope,
        tail.slope_std_err,
        tail.samples,
        if slope_ok { "pass" } else { "FAIL" }
    );

    let mut probes = sr.zero_sharing_probes.clone();
    probes.push(tail.thresholds[0]);
    let mut zero = Vec::new();
    for s in probes {
        match conditional_zero_sharing(&pairs, s) {
            Ok(c) => zero.push(vec![
                num(s),
                c.conditioned.to_string(),
                num(c.probability),
                num(c.std_err),
            ]),
            Err(Error::InsufficientData(_)) => {
                zero.push(vec![num(s), "0".into(), String::new(), String::new()])
            }
            Err(e) => return Err(e),
        }
    }
    ctx.write_table(
        "zero_sharing.csv",
        &["s", "conditioned", "probability", "std_err"],
        &zero,
    )?;

    let mut table = Vec::new();
    for &k in &sr.variance_xi_over_lambda {
        let pairs = snapshot_pairs(
            ctx,
            &format!("variance-{k}"),
            k * lam,
            r,
            sr.variance_samples,
        )?;
        let rf: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(s, n)| {
                let f = 1.0 / (1.0 + n as f64);
                (s / f, f)
            })
            .collect();
        let d = variance_decomposition(&rf)?;
        println!("ξ = {k}λ: var(S) = {:.5}", d.var_s);
        table.push(vec![
            num(k),
            num(d.var_s),
            num(d.var_r),
            num(d.var_f),
            num(d.reconstruction),
            num(d.gap),
            num(d.gap_std_err),
        ]);
    }
    ctx.write_table(
        "variance.csv",
        &[
            "xi_over_lambda",
            "var_s",
            "var_r",
            "var_f",
            "reconstruction",
            "gap",
            "gap_std_err",
        ],
        &table,
    )?;
    ctx.write_metadata(
        "sharedrate",
        json!({ "gamma": gamma, "radius": r, "tail_target": target }),
    )?;
    Ok(Status::from_bool(slope_ok))
}

/// Resolves the output directory, creating it.
pub fn ensure_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}
