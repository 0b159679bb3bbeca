use std::fs;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use degenwave_core::bounds::{compute_bounds, DominantBranch, SpeedBounds};
use degenwave_core::model::{build_power_law_bounds_only, ModelConfig, ModelSpec, ReactionKind};
use degenwave_core::numerics::StepStats;
use degenwave_core::pdesim::{
    measure_speed, run_pde, FaceDiffusivity, InitialData, PdeConfig, PdeRun,
};
use degenwave_core::profile::{
    append_rest_state, check_first_integral, reconstruct_with, residuals, FrontEdge,
    ResidualReport, WaveProfile,
};
use degenwave_core::shooting::{
    classify_regime, decide_with, find_threshold_with, is_admissible, threshold_diagnostic_delta,
    threshold_profile_delta, Admissibility, Regime, RegimeReport, ShootConfig, ShootError,
    ShotResult, SpeedReport, Termination,
};

use crate::cache::{shoot_cached, ShotCache};
use crate::cli::{Cli, Command, FaceArg, PdeArgs};
use crate::output::{
    num, opt, sha256_hex, timestamp, to_json, RunManifest, Sink, Table, Tolerances,
};
use crate::svg::{profile_figure, Curve};

const SPEED_TOL_C: f64 = 1e-3;
const PROFILE_TOL_C: f64 = 1e-6;
const CLASSICAL_OFFSET: f64 = 0.5;
const FIGURE_SAMPLES: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

struct Ctx {
    config: ModelConfig,
    model: ModelSpec,
    model_hash: String,
    shoot: ShootConfig,
    cache: Option<ShotCache>,
    format: Option<Format>,
}

impl Ctx {
    fn shooter(&self) -> impl FnMut(f64, &ShootConfig) -> Result<ShotResult, ShootError> + '_ {
        move |c, cfg| shoot_cached(self.cache.as_ref(), &self.model_hash, &self.model, c, cfg)
    }

    fn threshold(&self, tol_c: f64) -> Result<SpeedReport, ShootError> {
        find_threshold_with(&self.model, tol_c, &self.shoot, &mut self.shooter())
    }
}

pub fn smga_config() -> ModelConfig {
    ModelConfig::PowerLaw {
        alpha: 1.0,
        gamma: 1.0,
        reaction: ReactionKind::Product,
    }
}

fn load_config(path: Option<&std::path::Path>) -> Result<ModelConfig> {
    let Some(path) = path else {
        return Ok(smga_config());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ModelConfig::from_json(&text)
        .with_context(|| format!("invalid model config {}", path.display()))
}

fn emit<T: Serialize>(ctx: &Ctx, default: Format, json: &T, table: &Table) -> Result<()> {
    let bytes = match ctx.format.unwrap_or(default) {
        Format::Json => to_json(json)?,
        Format::Csv => table.to_csv()?,
    };
    std::io::stdout().lock().write_all(&bytes)?;
    Ok(())
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let g = &cli.global;
    let config = load_config(g.model.as_deref())?;
    let model = config.build()?;
    let model_hash = sha256_hex(serde_json::to_string(&config)?.as_bytes());
    let shoot = ShootConfig::default().with_eps(g.eps).with_delta(g.delta);
    let cache = g.cache.clone().map(ShotCache::open).transpose()?;
    let format = match (g.json, g.csv) {
        (true, _) => Some(Format::Json),
        (_, true) => Some(Format::Csv),
        _ => None,
    };
    let ctx = Ctx {
        config,
        model,
        model_hash,
        shoot,
        cache,
        format,
    };
    let mut sink = Sink::new(g.out.clone())?;
    let (name, tol_c, bounds_tol) = match &cli.command {
        Command::Bounds { tol } => {
            cmd_bounds(&ctx, &mut sink, *tol)?;
            ("bounds", None, Some(*tol))
        }
        Command::Shoot { speed } => {
            cmd_shoot(&ctx, &mut sink, *speed)?;
            ("shoot", None, None)
        }
        Command::Speed => {
            let tol_c = g.tol_c.unwrap_or(SPEED_TOL_C);
            cmd_speed(&ctx, &mut sink, tol_c)?;
            ("speed", Some(tol_c), None)
        }
        Command::Profile {
            speed,
            threshold,
            anchor,
            svg,
            rest,
        } => {
            let tol_c = threshold.then(|| g.tol_c.unwrap_or(PROFILE_TOL_C));
            cmd_profile(
                &ctx,
                &mut sink,
                *speed,
                tol_c,
                *anchor,
                svg.as_deref(),
                *rest,
            )?;
            ("profile", tol_c, None)
        }
        Command::Pde(args) => {
            cmd_pde(&ctx, &mut sink, args)?;
            ("pde", None, None)
        }
        Command::Sweep {
            alpha,
            gamma,
            speeds,
            tol,
        } => {
            let tol_c = speeds.then(|| g.tol_c.unwrap_or(SPEED_TOL_C));
            cmd_sweep(&ctx, &mut sink, alpha, *gamma, tol_c, *tol)?;
            ("sweep", tol_c, Some(*tol))
        }
        Command::Report { pde, tol } => {
            let tol_c = g.tol_c.unwrap_or(PROFILE_TOL_C);
            cmd_report(&ctx, &mut sink, tol_c, *tol, *pde)?;
            ("report", Some(tol_c), Some(*tol))
        }
    };
    sink.finish(RunManifest {
        command: name.to_string(),
        arguments: argv,
        model: serde_json::to_value(&ctx.config)?,
        model_hash: ctx.model_hash.clone(),
        tolerances: Tolerances {
            tol_c,
            eps: ctx.shoot.eps,
            delta: ctx.shoot.delta,
            rel_tol: ctx.shoot.integrator.rel_tol,
            abs_tol: ctx.shoot.integrator.abs_tol,
            bounds_tol,
        },
        seeds: Vec::new(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        outputs: Vec::new(),
    })
}

#[derive(Serialize)]
struct BoundsOut<'a> {
    model: &'a ModelConfig,
    tol: f64,
    #[serde(flatten)]
    bounds: SpeedBounds,
}

fn bounds_table(rows: &[SpeedBounds]) -> Table {
    let mut t = Table::new(&[
        "c_sharp_branch1",
        "c_sharp_branch2",
        "c_sharp",
        "c_star",
        "branch1_error",
        "branch2_error",
        "dominant_branch",
    ]);
    for b in rows {
        t.push(vec![
            num(b.c_sharp_branch1),
            num(b.c_sharp_branch2),
            num(b.c_sharp),
            num(b.c_star),
            num(b.branch1_error),
            num(b.branch2_error),
            b.dominant_branch.label().to_string(),
        ]);
    }
    t
}

fn cmd_bounds(ctx: &Ctx, sink: &mut Sink, tol: f64) -> Result<()> {
    let bounds = compute_bounds(&ctx.model, tol)?;
    let out = BoundsOut {
        model: &ctx.config,
        tol,
        bounds,
    };
    let table = bounds_table(&[bounds]);
    sink.json("bounds.json", &out)?;
    sink.csv("bounds.csv", &table)?;
    emit(ctx, Format::Json, &out, &table)
}

#[derive(Serialize)]
struct ShotOut<'a> {
    model: &'a ModelConfig,
    c: f64,
    eps: f64,
    delta: f64,
    eta_end: f64,
    b_end: f64,
    threshold: f64,
    admissibility: Admissibility,
    admissible: bool,
    regime: Regime,
    termination: Termination,
    tail_exponent: Option<f64>,
    tail_amplitude: Option<f64>,
    sharp_amplitude: f64,
    diagonal_drift: f64,
    launch_coefficient: f64,
    stats: StepStats,
    samples: usize,
    classification: Option<RegimeReport>,
}

fn shot_out<'a>(ctx: &'a Ctx, s: &ShotResult) -> ShotOut<'a> {
    ShotOut {
        model: &ctx.config,
        c: s.c,
        eps: s.eps,
        delta: s.delta,
        eta_end: s.eta_end,
        b_end: s.b_end,
        threshold: s.threshold,
        admissibility: s.admissibility,
        admissible: s.admissible,
        regime: s.regime,
        termination: s.termination,
        tail_exponent: s.tail_exponent,
        tail_amplitude: s.tail_amplitude,
        sharp_amplitude: s.sharp_amplitude,
        diagonal_drift: s.diagonal_drift,
        launch_coefficient: s.launch_coefficient,
        stats: s.stats,
        samples: s.eta.len(),
        classification: classify_regime(&ctx.model, s).ok(),
    }
}

fn trajectory_table(s: &ShotResult) -> Table {
    let mut t = Table::new(&["eta", "b", "db", "gap"]);
    for i in 0..s.eta.len() {
        t.push(vec![
            num(s.eta[i]),
            num(s.b[i]),
            num(s.db[i]),
            num(s.gap[i]),
        ]);
    }
    t
}

fn cmd_shoot(ctx: &Ctx, sink: &mut Sink, c: f64) -> Result<()> {
    let (_, shot) = decide_with(c, &ctx.shoot, &mut ctx.shooter())?;
    let out = shot_out(ctx, &shot);
    let table = trajectory_table(&shot);
    sink.json("shot.json", &out)?;
    sink.csv("trajectory.csv", &table)?;
    emit(ctx, Format::Json, &out, &table)
}

#[derive(Serialize)]
struct SpeedOut<'a> {
    model: &'a ModelConfig,
    #[serde(flatten)]
    report: &'a SpeedReport,
}

fn samples_table(r: &SpeedReport) -> Table {
    let mut t = Table::new(&[
        "c",
        "admissible",
        "admissibility",
        "delta",
        "b_end",
        "threshold",
        "tail_exponent",
        "tail_amplitude",
        "steps",
    ]);
    for s in &r.samples {
        t.push(vec![
            num(s.c),
            s.admissible.to_string(),
            admissibility_label(s.shot.admissibility).to_string(),
            num(s.shot.delta),
            num(s.shot.b_end),
            num(s.shot.threshold),
            opt(s.shot.tail_exponent),
            opt(s.shot.tail_amplitude),
            s.shot.steps.to_string(),
        ]);
    }
    t
}

fn admissibility_label(a: Admissibility) -> &'static str {
    match a {
        Admissibility::Admissible => "admissible",
        Admissibility::NonAdmissible => "non_admissible",
        Admissibility::Inconclusive => "inconclusive",
    }
}

fn cmd_speed(ctx: &Ctx, sink: &mut Sink, tol_c: f64) -> Result<()> {
    let report = ctx.threshold(tol_c)?;
    let out = SpeedOut {
        model: &ctx.config,
        report: &report,
    };
    let table = samples_table(&report);
    sink.json("speed.json", &out)?;
    sink.csv("speed_samples.csv", &table)?;
    emit(ctx, Format::Json, &out, &table)
}

#[derive(Debug, Clone, Serialize)]
struct ProfileSummary {
    c: f64,
    eta0: f64,
    /// Stop offset of the shot the profile was rebuilt from.
    delta: f64,
    tau: FrontEdge,
    sigma_equals_tau: bool,
    residual: ResidualReport,
    edge_slope: f64,
    expected_sharp_edge_slope: f64,
    edge_slope_ratio: f64,
    derivative_mismatch: f64,
    envelope_violation: f64,
    min_barrier_gap: f64,
    truncated_at: Option<f64>,
    samples: usize,
    xi_min: f64,
    xi_max: f64,
}

fn summarize(m: &ModelSpec, p: &WaveProfile, delta: f64) -> ProfileSummary {
    ProfileSummary {
        c: p.c,
        eta0: p.eta0,
        delta,
        tau: p.tau,
        sigma_equals_tau: p.sigma_equals_tau,
        residual: check_first_integral(m, p),
        edge_slope: p.edge_slope,
        expected_sharp_edge_slope: m.sharp_edge_slope(p.c),
        edge_slope_ratio: p.edge_slope_ratio,
        derivative_mismatch: p.derivative_mismatch,
        envelope_violation: p.envelope_violation,
        min_barrier_gap: p
            .eta
            .iter()
            .zip(&p.beta)
            .map(|(e, b)| e + b - 1.0)
            .fold(f64::INFINITY, f64::min),
        truncated_at: p.truncated_at,
        samples: p.xi.len(),
        xi_min: p.xi.first().copied().unwrap_or(f64::NAN),
        xi_max: p.xi.last().copied().unwrap_or(f64::NAN),
    }
}

fn profile_table(m: &ModelSpec, p: &WaveProfile) -> Table {
    let res = residuals(m, p);
    let mut t = Table::new(&["xi", "eta", "beta", "dbeta", "residual"]);
    for (i, r) in res.iter().enumerate() {
        t.push(vec![
            num(p.xi[i]),
            num(p.eta[i]),
            num(p.beta[i]),
            num(p.dbeta[i]),
            num(*r),
        ]);
    }
    t
}

/// Plotted portion of a profile: from η = 1e-3 to where β drops below 1e-3,
/// continued by the rest state beyond a finite edge.
fn curve(p: &WaveProfile, label: String, dashed: bool) -> Curve {
    let first = p.eta.iter().position(|&e| e >= 1e-3).unwrap_or(0);
    let last = p
        .beta
        .iter()
        .position(|&b| b <= 1e-3)
        .unwrap_or(p.beta.len() - 1);
    let (lo, hi) = (p.xi[first], p.xi[last.max(first + 1).min(p.xi.len() - 1)]);
    let mut xi = Vec::with_capacity(FIGURE_SAMPLES + 2);
    let mut eta = Vec::with_capacity(FIGURE_SAMPLES + 2);
    let mut beta = Vec::with_capacity(FIGURE_SAMPLES + 2);
    for row in degenwave_core::profile::resample_uniform(p, lo, hi, FIGURE_SAMPLES) {
        xi.push(row.xi);
        eta.push(row.eta);
        beta.push(row.beta);
    }
    let tau = match p.tau {
        FrontEdge::Finite { tau_offset } => {
            let ext = (hi - lo) * 0.15;
            xi.extend([tau_offset, tau_offset + ext]);
            eta.extend([1.0, 1.0]);
            beta.extend([0.0, 0.0]);
            Some(tau_offset)
        }
        _ => None,
    };
    Curve {
        label,
        xi,
        eta,
        beta,
        dashed,
        tau,
    }
}

fn edge_label(e: &FrontEdge) -> &'static str {
    match e {
        FrontEdge::Finite { .. } => "finite edge",
        FrontEdge::Infinite => "no finite edge",
        FrontEdge::Indeterminate => "edge undecided",
    }
}

#[derive(Serialize)]
struct ProfileOut<'a> {
    model: &'a ModelConfig,
    threshold_bracket: Option<[f64; 2]>,
    #[serde(flatten)]
    profile: ProfileSummary,
}

fn cmd_profile(
    ctx: &Ctx,
    sink: &mut Sink,
    speed: Option<f64>,
    tol_c: Option<f64>,
    anchor: f64,
    svg: Option<&std::path::Path>,
    rest: Option<f64>,
) -> Result<()> {
    let (shot, cfg, bracket) = match (speed, tol_c) {
        (_, Some(tol_c)) => {
            let report = ctx.threshold(tol_c)?;
            let cfg = ctx
                .shoot
                .with_delta(threshold_profile_delta(ctx.shoot.delta));
            let shot = shoot_cached(
                ctx.cache.as_ref(),
                &ctx.model_hash,
                &ctx.model,
                report.c0,
                &cfg,
            )?;
            (shot, cfg, Some([report.c_lo, report.c_hi]))
        }
        (Some(c), None) => {
            let (adm, shot) = decide_with(c, &ctx.shoot, &mut ctx.shooter())?;
            if !adm {
                bail!(ShootError::NotAdmissible { c });
            }
            let cfg = ctx.shoot.with_delta(shot.delta);
            (shot, cfg, None)
        }
        (None, None) => bail!("either --speed or --threshold is required"),
    };
    let mut p = reconstruct_with(&ctx.model, &shot, anchor, &cfg)?;
    let summary = summarize(&ctx.model, &p, shot.delta);
    let figure = svg.map(|_| {
        profile_figure(
            &format!("wave profile at c = {:.6}", p.c),
            &[curve(
                &p,
                format!("c = {:.6}, {}", p.c, edge_label(&p.tau)),
                false,
            )],
        )
    });
    if let Some(len) = rest {
        append_rest_state(&mut p, len, 50);
    }
    let out = ProfileOut {
        model: &ctx.config,
        threshold_bracket: bracket,
        profile: summary,
    };
    let table = profile_table(&ctx.model, &p);
    sink.json("profile.json", &out)?;
    sink.csv("profile.csv", &table)?;
    if let (Some(path), Some(fig)) = (svg, figure) {
        sink.write_path(path, fig.as_bytes())?;
    }
    emit(ctx, Format::Json, &out, &table)
}

#[derive(Debug, Clone, Serialize)]
struct PdeSummary {
    config: PdeConfig,
    /// Fit over the last half of the run.
    speed: Option<f64>,
    speed_stderr: Option<f64>,
    /// Fit after the first quarter of the run.
    measured_speed: Option<f64>,
    measured_stderr: Option<f64>,
    front_lost: Option<String>,
    mass_initial: f64,
    mass_final: f64,
    max_mass_step_change: f64,
    mass_rate: f64,
    b_mass_rate: f64,
    clip_count: usize,
    max_clip: f64,
    steps: usize,
    halvings: usize,
    front_monotone: bool,
    samples: usize,
}

fn pde_config(a: &PdeArgs) -> PdeConfig {
    PdeConfig {
        length: a.length,
        cells: a.cells,
        t_end: a.time,
        cfl: a.cfl,
        initial: InitialData::Step {
            x0: a.x0,
            width: a.width,
        },
        sample_dt: a.sample_dt,
        face: match a.face {
            FaceArg::Arithmetic => FaceDiffusivity::Arithmetic,
            FaceArg::Upwind => FaceDiffusivity::UpwindWeighted,
        },
        reaction: !a.no_reaction,
    }
}

fn pde_summary(run: &PdeRun) -> PdeSummary {
    let measured = measure_speed(run);
    PdeSummary {
        config: run.config,
        speed: run.speed,
        speed_stderr: run.speed_stderr,
        measured_speed: measured.as_ref().ok().map(|v| v.0),
        measured_stderr: measured.as_ref().ok().map(|v| v.1),
        front_lost: measured.err().map(|e| e.to_string()),
        mass_initial: run.mass_initial,
        mass_final: run.mass_final,
        max_mass_step_change: run.max_mass_step_change,
        mass_rate: run.mass_rate,
        b_mass_rate: (run.b_mass_final - run.b_mass_initial).abs() / run.config.t_end,
        clip_count: run.clip_count,
        max_clip: run.max_clip,
        steps: run.steps,
        halvings: run.halvings,
        front_monotone: run.front_monotone,
        samples: run.times.len(),
    }
}

fn fronts_table(run: &PdeRun) -> Table {
    let mut t = Table::new(&["t", "x_front"]);
    for (time, x) in run.times.iter().zip(&run.fronts) {
        t.push(vec![num(*time), num(*x)]);
    }
    t
}

#[derive(Serialize)]
struct PdeOut<'a> {
    model: &'a ModelConfig,
    #[serde(flatten)]
    summary: PdeSummary,
}

fn cmd_pde(ctx: &Ctx, sink: &mut Sink, args: &PdeArgs) -> Result<()> {
    let run = run_pde(&ctx.model, &pde_config(args))?;
    let out = PdeOut {
        model: &ctx.config,
        summary: pde_summary(&run),
    };
    let table = fronts_table(&run);
    sink.json("pde.json", &out)?;
    sink.csv("fronts.csv", &table)?;
    emit(ctx, Format::Json, &out, &table)
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    alpha: f64,
    gamma: f64,
    branch1: Option<f64>,
    branch2: Option<f64>,
    c_sharp: Option<f64>,
    c_star: Option<f64>,
    dominant_branch: Option<DominantBranch>,
    c0: Option<f64>,
    status: String,
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| anyhow!("bad alpha {s:?}: {e}"))
        })
        .collect()
}

fn sweep_row(
    ctx: &Ctx,
    alpha: f64,
    gamma: f64,
    reaction: ReactionKind,
    tol: f64,
    tol_c: Option<f64>,
) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        gamma,
        branch1: None,
        branch2: None,
        c_sharp: None,
        c_star: None,
        dominant_branch: None,
        c0: None,
        status: "ok".into(),
    };
    let model = match build_power_law_bounds_only(alpha, gamma, reaction) {
        Ok(m) => m,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    match compute_bounds(&model, tol) {
        Ok(b) => {
            row.branch1 = Some(b.c_sharp_branch1);
            row.branch2 = Some(b.c_sharp_branch2);
            row.c_sharp = Some(b.c_sharp);
            row.c_star = Some(b.c_star);
            row.dominant_branch = Some(b.dominant_branch);
        }
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    }
    let Some(tol_c) = tol_c else {
        return row;
    };
    if let Err(e) = model.check_shootable() {
        row.status = format!("bounds_only: {e}");
        return row;
    }
    let config = ModelConfig::PowerLaw {
        alpha,
        gamma,
        reaction,
    };
    let hash = sha256_hex(
        serde_json::to_string(&config)
            .unwrap_or_default()
            .as_bytes(),
    );
    let mut shooter =
        |c: f64, cfg: &ShootConfig| shoot_cached(ctx.cache.as_ref(), &hash, &model, c, cfg);
    match find_threshold_with(&model, tol_c, &ctx.shoot, &mut shooter) {
        Ok(r) => row.c0 = Some(r.c0),
        Err(e @ ShootError::Inconclusive { .. }) => row.status = format!("inconclusive: {e}"),
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&[
        "alpha",
        "gamma",
        "branch1",
        "branch2",
        "c_sharp",
        "c_star",
        "dominant_branch",
        "c0",
        "status",
    ]);
    for r in rows {
        t.push(vec![
            num(r.alpha),
            num(r.gamma),
            opt(r.branch1),
            opt(r.branch2),
            opt(r.c_sharp),
            opt(r.c_star),
            r.dominant_branch
                .map(|d| d.label().to_string())
                .unwrap_or_default(),
            opt(r.c0),
            r.status.clone(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct SweepOut<'a> {
    gamma: f64,
    reaction: ReactionKind,
    tol: f64,
    tol_c: Option<f64>,
    rows: &'a [SweepRow],
}

fn cmd_sweep(
    ctx: &Ctx,
    sink: &mut Sink,
    alpha: &str,
    gamma: Option<f64>,
    tol_c: Option<f64>,
    tol: f64,
) -> Result<()> {
    let grid = parse_grid(alpha)?;
    let ModelConfig::PowerLaw {
        gamma: base_gamma,
        reaction,
        ..
    } = ctx.config;
    let gamma = gamma.unwrap_or(base_gamma);
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&a| sweep_row(ctx, a, gamma, reaction, tol, tol_c))
        .collect();
    let out = SweepOut {
        gamma,
        reaction,
        tol,
        tol_c,
        rows: &rows,
    };
    let table = sweep_table(&rows);
    sink.csv("sweep.csv", &table)?;
    sink.json("sweep.json", &out)?;
    emit(ctx, Format::Csv, &out, &table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Skipped,
    Inconclusive,
    Error,
}

#[derive(Debug, Clone, Serialize)]
struct Section<T> {
    status: Status,
    detail: Option<String>,
    value: Option<T>,
}

impl<T> Section<T> {
    fn ok(value: T) -> Self {
        Self {
            status: Status::Ok,
            detail: None,
            value: Some(value),
        }
    }

    fn skipped(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Skipped,
            detail: Some(detail.into()),
            value: None,
        }
    }

    fn failed(err: &dyn std::fmt::Display, inconclusive: bool) -> Self {
        Self {
            status: if inconclusive {
                Status::Inconclusive
            } else {
                Status::Error
            },
            detail: Some(err.to_string()),
            value: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CrossCheck {
    #[serde(flatten)]
    run: PdeSummary,
    /// `|speed − c0| / c0` with the late-time fit.
    relative_gap_to_c0: Option<f64>,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    model: &'a ModelConfig,
    tool_version: &'static str,
    tol_c: f64,
    bounds: Section<SpeedBounds>,
    speed: Section<SpeedReport>,
    threshold_regime: Section<RegimeReport>,
    sharp_profile: Section<ProfileSummary>,
    classical_profile: Section<ProfileSummary>,
    pde: Option<Section<CrossCheck>>,
    /// `|c0 − √(1/2)| / √(1/2)` for the reference model.
    c0_vs_sqrt_half: Option<f64>,
}

fn inconclusive(e: &ShootError) -> bool {
    matches!(e, ShootError::Inconclusive { .. })
}

fn profile_section(
    ctx: &Ctx,
    c: f64,
    cfg: &ShootConfig,
) -> (Section<ProfileSummary>, Option<WaveProfile>) {
    let shot = match shoot_cached(ctx.cache.as_ref(), &ctx.model_hash, &ctx.model, c, cfg) {
        Ok(s) => s,
        Err(e) => return (Section::failed(&e, inconclusive(&e)), None),
    };
    match is_admissible(&shot) {
        Ok(true) => {}
        Ok(false) => {
            return (
                Section::failed(&ShootError::NotAdmissible { c }, false),
                None,
            )
        }
        Err(e) => return (Section::failed(&e, inconclusive(&e)), None),
    }
    match reconstruct_with(&ctx.model, &shot, 0.5, cfg) {
        Ok(p) => (Section::ok(summarize(&ctx.model, &p, shot.delta)), Some(p)),
        Err(e) => (Section::failed(&e, false), None),
    }
}

fn cmd_report(ctx: &Ctx, sink: &mut Sink, tol_c: f64, tol: f64, with_pde: bool) -> Result<()> {
    let bounds = match compute_bounds(&ctx.model, tol) {
        Ok(b) => Section::ok(b),
        Err(e) => Section::failed(&e, false),
    };
    let shootable = ctx.model.check_shootable();
    let speed = match &shootable {
        Err(e) => Section::skipped(format!("bounds-only model: {e}")),
        Ok(()) if bounds.status != Status::Ok => Section::skipped("bounds unavailable"),
        Ok(()) => match ctx.threshold(tol_c) {
            Ok(r) => Section::ok(r),
            Err(e) => Section::failed(&e, inconclusive(&e)),
        },
    };
    let mut figure = Vec::new();
    let mut tables = Vec::new();
    let (threshold_regime, sharp_profile, classical_profile) = match &speed.value {
        None => {
            let why = "threshold speed unavailable";
            (
                Section::skipped(why),
                Section::skipped(why),
                Section::skipped(why),
            )
        }
        Some(r) => {
            let diag = ctx
                .shoot
                .with_delta(threshold_diagnostic_delta(ctx.shoot.delta));
            let regime =
                match shoot_cached(ctx.cache.as_ref(), &ctx.model_hash, &ctx.model, r.c0, &diag)
                    .and_then(|s| classify_regime(&ctx.model, &s))
                {
                    Ok(v) => Section::ok(v),
                    Err(e) => Section::failed(&e, inconclusive(&e)),
                };
            let sharp_cfg = ctx
                .shoot
                .with_delta(threshold_profile_delta(ctx.shoot.delta));
            let (sharp, sp) = profile_section(ctx, r.c0, &sharp_cfg);
            let (classical, cp) = profile_section(ctx, r.c0 + CLASSICAL_OFFSET, &ctx.shoot);
            for (p, name, label, dashed) in [
                (sp, "profile_sharp.csv", "c = c0", false),
                (cp, "profile_classical.csv", "c = c0 + 0.5", true),
            ] {
                if let Some(p) = p {
                    let text = format!("{label} = {:.6}, {}", p.c, edge_label(&p.tau));
                    figure.push(curve(&p, text, dashed));
                    tables.push((name, profile_table(&ctx.model, &p)));
                }
            }
            (regime, sharp, classical)
        }
    };
    let c0 = speed.value.as_ref().map(|r| r.c0);
    let pde = with_pde.then(|| match run_pde(&ctx.model, &PdeConfig::default()) {
        Ok(run) => {
            let summary = pde_summary(&run);
            let gap = match (summary.speed, c0) {
                (Some(v), Some(c0)) => Some((v - c0).abs() / c0),
                _ => None,
            };
            tables.push(("fronts.csv", fronts_table(&run)));
            Section::ok(CrossCheck {
                run: summary,
                relative_gap_to_c0: gap,
            })
        }
        Err(e) => Section::failed(&e, false),
    });
    let guess = 0.5f64.sqrt();
    let out = ReportOut {
        model: &ctx.config,
        tool_version: env!("CARGO_PKG_VERSION"),
        tol_c,
        c0_vs_sqrt_half: c0
            .filter(|_| ctx.config == smga_config())
            .map(|c0| (c0 - guess).abs() / guess),
        bounds,
        threshold_regime,
        sharp_profile,
        classical_profile,
        pde,
        speed,
    };

    let mut status = Table::new(&["section", "status", "detail"]);
    let mut add = |name: &str, s: Status, d: &Option<String>| {
        status.push(vec![
            name.to_string(),
            serde_json::to_value(s)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            d.clone().unwrap_or_default(),
        ])
    };
    add("bounds", out.bounds.status, &out.bounds.detail);
    add("speed", out.speed.status, &out.speed.detail);
    add(
        "threshold_regime",
        out.threshold_regime.status,
        &out.threshold_regime.detail,
    );
    add(
        "sharp_profile",
        out.sharp_profile.status,
        &out.sharp_profile.detail,
    );
    add(
        "classical_profile",
        out.classical_profile.status,
        &out.classical_profile.detail,
    );
    if let Some(p) = &out.pde {
        add("pde", p.status, &p.detail);
    }

    sink.json("report.json", &out)?;
    sink.csv("report_sections.csv", &status)?;
    if let Some(r) = &out.speed.value {
        sink.csv("speed_samples.csv", &samples_table(r))?;
    }
    for (name, t) in &tables {
        sink.csv(name, t)?;
    }
    if !figure.is_empty() && sink.enabled() {
        sink.write(
            "profiles.svg",
            profile_figure("wave profiles at and above the threshold speed", &figure).as_bytes(),
        )?;
    }
    emit(ctx, Format::Json, &out, &status)
}
