//! Shooting on the scalar reduction
//!
//! ```text
//! B'(η) = c²·(1 − η − B) / (g(η)·h(B)·f(η, B)),   B(0) = 1,
//! ```
//!
//! whose solution `B_c` describes the wave with `β = B(η)`. A speed is
//! admissible exactly when `B_c(1) = 0`, and admissibility is monotone in `c`,
//! so the threshold speed `c0` is located by bisection.
//!
//! The integrated unknown is the gap to the diagonal, `u = B − (1 − η) ≥ 0`,
//! which keeps relative accuracy where `B` is close to `1 − η` at both ends.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{compute_bounds, BoundsError, DEFAULT_BOUNDS_TOL};
use crate::model::{ModelError, ModelSpec};
use crate::numerics::{
    fit_power_law, integrate_ivp, integrate_scalar, try_bisect_monotone, BracketError, Crossing,
    EventSpec, IntegrationError, IntegratorConfig, Output, StepStats,
};

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_DELTA: f64 = 1e-6;
/// Largest launch or stop offset accepted by [`shoot`].
pub const MAX_OFFSET: f64 = 1e-4;
/// Allowed drift below the diagonal `B = 1 − η`.
pub const DRIFT_TOL: f64 = 1e-9;
/// Number of times `δ` is divided by 10 after an inconclusive shot.
pub const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error("integration failed at eta = {last_eta:?}: {source}")]
    Integration {
        source: IntegrationError,
        last_eta: Option<f64>,
    },
    #[error("launch series invalid at eps = {eps:e} for c = {c} (B(eps) = {b_eps}); shrink eps")]
    SingularLaunch { c: f64, eps: f64, b_eps: f64 },
    #[error("invalid shooting parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(
        "inconclusive admissibility at c = {c}: B_end = {b_end:e} within [{threshold:e}, 2x] \
         at delta = {delta:e}"
    )]
    Inconclusive {
        c: f64,
        b_end: f64,
        threshold: f64,
        delta: f64,
    },
    #[error("speed c = {c} is not admissible")]
    NotAdmissible { c: f64 },
    #[error("trajectory touched the diagonal at eta = {eta} for c = {c}")]
    DiagonalBreach { c: f64, eta: f64 },
}

impl From<IntegrationError> for ShootError {
    fn from(source: IntegrationError) -> Self {
        let last_eta = source.last_t();
        ShootError::Integration { source, last_eta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootConfig {
    /// Launch offset: integration starts at `η = eps`.
    pub eps: f64,
    /// Stop offset: integration ends at `η = 1 − delta`.
    pub delta: f64,
    pub integrator: IntegratorConfig,
    /// Sample density of the stored trajectory near both ends.
    pub samples_per_decade: usize,
    /// Uniform samples on `[0.01, 0.99]`.
    pub middle_samples: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            delta: DEFAULT_DELTA,
            integrator: IntegratorConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-20,
                max_steps: 20_000_000,
                min_step: 1e-14,
            },
            samples_per_decade: 200,
            middle_samples: 1000,
        }
    }
}

impl ShootConfig {
    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    NonAdmissible,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NonAdmissible,
    SharpCandidate,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached `η = 1 − δ`.
    Completed,
    /// `B` fell through `δ²`.
    FloorReached,
    /// `B` touched `1 − η`.
    DiagonalTouched,
}

/// One integrated trajectory `B_c(η)` with its endpoint diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub c: f64,
    pub eps: f64,
    pub delta: f64,
    pub eta: Vec<f64>,
    pub b: Vec<f64>,
    /// `B'(η)` at the samples, from the right-hand side.
    pub db: Vec<f64>,
    /// Integrated gap `u = B − (1 − η)` at the samples.
    pub gap: Vec<f64>,
    pub eta_end: f64,
    pub b_end: f64,
    /// `p` and `A` of `B ≈ A·(1−η)^p` fitted over `1−η ∈ [δ, 100δ]`.
    pub tail_exponent: Option<f64>,
    pub tail_amplitude: Option<f64>,
    /// Sharp-tail amplitude `C(c)`.
    pub sharp_amplitude: f64,
    /// `2·C(c)·√δ + δ`
    pub threshold: f64,
    pub admissibility: Admissibility,
    pub admissible: bool,
    pub regime: Regime,
    pub termination: Termination,
    /// Largest drift below the diagonal over the samples.
    pub diagonal_drift: f64,
    pub stats: StepStats,
    /// `h(1)·g'(0)·∂f/∂s(0,1)`, kept for the series below `eps`.
    pub launch_coefficient: f64,
}

impl ShotResult {
    /// `B` at `η` by cubic Hermite interpolation of the samples; the launch
    /// series is used below `eps`. `None` beyond the integrated range.
    pub fn b_at(&self, eta: f64) -> Option<f64> {
        let (v, _) = self.b_and_slope_at(eta)?;
        Some(v)
    }

    /// `(B, B')` at `η`.
    pub fn b_and_slope_at(&self, eta: f64) -> Option<(f64, f64)> {
        let n = self.eta.len();
        if n == 0 || !(eta >= 0.0) || eta > self.eta[n - 1] {
            return None;
        }
        if eta < self.eta[0] {
            let k = self.launch_coefficient / (self.c * self.c);
            return Some((1.0 - eta + k * eta * eta, -1.0 + 2.0 * k * eta));
        }
        let i = self.eta.partition_point(|&e| e <= eta).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.eta[i], self.eta[i + 1]);
        let h = x1 - x0;
        let t = (eta - x0) / h;
        let (y0, y1) = (self.b[i], self.b[i + 1]);
        let (d0, d1) = (self.db[i] * h, self.db[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Some((v, dv))
    }

    /// Copy without the sampled trajectory.
    pub fn summary(&self) -> ShotSummary {
        ShotSummary {
            c: self.c,
            delta: self.delta,
            b_end: self.b_end,
            threshold: self.threshold,
            admissibility: self.admissibility,
            tail_exponent: self.tail_exponent,
            tail_amplitude: self.tail_amplitude,
            steps: self.stats.accepted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSummary {
    pub c: f64,
    pub delta: f64,
    pub b_end: f64,
    pub threshold: f64,
    pub admissibility: Admissibility,
    pub tail_exponent: Option<f64>,
    pub tail_amplitude: Option<f64>,
    pub steps: usize,
}

/// Sample abscissae: log-spaced near both ends, uniform in the middle.
pub fn sample_grid(eps: f64, delta: f64, per_decade: usize, middle: usize) -> Vec<f64> {
    let per_decade = per_decade.max(2);
    let (lo_edge, hi_edge) = (0.01f64.max(eps), 0.99f64.min(1.0 - delta));
    let mut g = Vec::new();
    // η from eps to 0.01
    if eps < lo_edge {
        let decades = (lo_edge / eps).log10();
        let n = (decades * per_decade as f64).ceil() as usize;
        for i in 0..n {
            g.push(eps * 10f64.powf(decades * i as f64 / n as f64));
        }
    }
    let middle = middle.max(2);
    for i in 0..middle {
        g.push(lo_edge + (hi_edge - lo_edge) * i as f64 / (middle - 1) as f64);
    }
    // 1−η from 0.01 down to delta
    let x_hi = 1.0 - hi_edge;
    if delta < x_hi {
        let decades = (x_hi / delta).log10();
        let n = (decades * per_decade as f64).ceil() as usize;
        for i in 1..=n {
            g.push(1.0 - x_hi * 10f64.powf(-decades * i as f64 / n as f64));
        }
    }
    let last = 1.0 - delta;
    g.retain(|&e| e >= eps && e <= last);
    g.dedup_by(|a, b| *a <= *b);
    if g.last() != Some(&last) {
        g.push(last);
    }
    g
}

fn validate(c: f64, cfg: &ShootConfig) -> Result<(), ShootError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(ShootError::InvalidParameter {
            name: "c",
            value: c,
        });
    }
    if !(cfg.eps > 0.0 && cfg.eps <= MAX_OFFSET) {
        return Err(ShootError::InvalidParameter {
            name: "eps",
            value: cfg.eps,
        });
    }
    if !(cfg.delta > 0.0 && cfg.delta <= MAX_OFFSET) {
        return Err(ShootError::InvalidParameter {
            name: "delta",
            value: cfg.delta,
        });
    }
    Ok(())
}

/// `2·C(c)·√δ + δ`, the admissibility threshold on `B(1−δ)`.
pub fn admissibility_threshold(m: &ModelSpec, c: f64, delta: f64) -> f64 {
    2.0 * m.sharp_amplitude(c) * delta.sqrt() + delta
}

fn classify_end(b_end: f64, threshold: f64, termination: Termination) -> Admissibility {
    if termination == Termination::FloorReached || b_end <= threshold {
        Admissibility::Admissible
    } else if b_end <= 2.0 * threshold {
        Admissibility::Inconclusive
    } else {
        Admissibility::NonAdmissible
    }
}

/// Integrates `B_c` from the launch series at `η = eps` to `η = 1 − delta`.
pub fn shoot(m: &ModelSpec, c: f64, cfg: &ShootConfig) -> Result<ShotResult, ShootError> {
    validate(c, cfg)?;
    m.check_shootable()?;
    let (eps, delta) = (cfg.eps, cfg.delta);
    let k = m.launch_coefficient();
    let c2 = c * c;
    let u0 = k * eps * eps / c2;
    if !(u0 > 0.0 && u0 < eps) {
        return Err(ShootError::SingularLaunch {
            c,
            eps,
            b_eps: 1.0 - eps + u0,
        });
    }

    let rhs = |eta: f64, y: &[f64], dy: &mut [f64]| {
        let u = y[0];
        let b = (1.0 - eta) + u;
        dy[0] = 1.0 - c2 * u / (m.g(eta) * m.h(b) * m.f(eta, b));
    };
    let floor = delta * delta;
    let events = [
        EventSpec::new(|_, y| y[0], Crossing::Falling, true),
        EventSpec::new(
            move |eta, y| (1.0 - eta) + y[0] - floor,
            Crossing::Falling,
            true,
        ),
    ];
    let eta_stop = 1.0 - delta;
    let grid = sample_grid(eps, delta, cfg.samples_per_decade, cfg.middle_samples);
    let sol = integrate_ivp(
        rhs,
        eps,
        eta_stop,
        &[u0],
        &cfg.integrator,
        &events,
        Output::Grid(grid),
    )?;

    let termination = match sol.terminated_by {
        None => Termination::Completed,
        Some(0) => Termination::DiagonalTouched,
        Some(_) => Termination::FloorReached,
    };
    let mut eta = sol.t;
    let mut us: Vec<f64> = sol.y.iter().map(|y| y[0]).collect();
    if eta.last() != Some(&sol.t_end) {
        eta.push(sol.t_end);
        us.push(sol.y_end[0]);
    }
    let b: Vec<f64> = eta.iter().zip(&us).map(|(e, u)| (1.0 - e) + u).collect();
    let db: Vec<f64> = eta
        .iter()
        .zip(&us)
        .zip(&b)
        .map(|((&e, &u), &bb)| -c2 * u / (m.g(e) * m.h(bb) * m.f(e, bb)))
        .collect();
    let diagonal_drift = us.iter().fold(0.0f64, |acc, &u| acc.max(-u));

    let eta_end = sol.t_end;
    let b_end = (1.0 - eta_end) + sol.y_end[0];

    let (xs, bs): (Vec<f64>, Vec<f64>) = eta
        .iter()
        .zip(&b)
        .map(|(e, bb)| (1.0 - e, *bb))
        .filter(|(x, _)| *x >= delta * (1.0 - 1e-9) && *x <= 100.0 * delta * (1.0 + 1e-9))
        .unzip();
    let fit = if termination == Termination::Completed {
        fit_power_law(&xs, &bs)
    } else {
        None
    };

    let threshold = admissibility_threshold(m, c, delta);
    let admissibility = classify_end(b_end, threshold, termination);
    let admissible = admissibility == Admissibility::Admissible;
    let regime = match (admissible, fit) {
        (false, _) => Regime::NonAdmissible,
        (true, Some((p, _))) if (0.85..=1.15).contains(&p) => Regime::Classical,
        (true, _) => Regime::SharpCandidate,
    };

    Ok(ShotResult {
        c,
        eps,
        delta,
        eta,
        b,
        db,
        gap: us,
        eta_end,
        b_end,
        tail_exponent: fit.map(|f| f.0),
        tail_amplitude: fit.map(|f| f.1),
        sharp_amplitude: m.sharp_amplitude(c),
        threshold,
        admissibility,
        admissible,
        regime,
        termination,
        diagonal_drift,
        stats: sol.stats,
        launch_coefficient: k,
    })
}

/// `true` iff `B(1−δ) ≤ 2·C(c)·√δ + δ`; inside `[thr, 2·thr]` the shot is inconclusive.
pub fn is_admissible(shot: &ShotResult) -> Result<bool, ShootError> {
    match shot.termination {
        Termination::DiagonalTouched => {
            return Err(ShootError::DiagonalBreach {
                c: shot.c,
                eta: shot.eta_end,
            })
        }
        Termination::FloorReached => return Ok(true),
        Termination::Completed => {}
    }
    match shot.admissibility {
        Admissibility::Admissible => Ok(true),
        Admissibility::NonAdmissible => Ok(false),
        Admissibility::Inconclusive => Err(ShootError::Inconclusive {
            c: shot.c,
            b_end: shot.b_end,
            threshold: shot.threshold,
            delta: shot.delta,
        }),
    }
}

/// Shoots and decides admissibility, dividing `δ` by 10 (at most three
/// times) while the outcome is inconclusive.
pub fn decide(m: &ModelSpec, c: f64, cfg: &ShootConfig) -> Result<(bool, ShotResult), ShootError> {
    decide_with(c, cfg, &mut |c, cfg| shoot(m, c, cfg))
}

/// [`decide`] with a caller-supplied shooter, e.g. one backed by a cache.
pub fn decide_with<S>(
    c: f64,
    cfg: &ShootConfig,
    shooter: &mut S,
) -> Result<(bool, ShotResult), ShootError>
where
    S: FnMut(f64, &ShootConfig) -> Result<ShotResult, ShootError>,
{
    let mut cfg = *cfg;
    let mut refinements = 0;
    loop {
        let shot = shooter(c, &cfg)?;
        match is_admissible(&shot) {
            Ok(v) => return Ok((v, shot)),
            Err(ShootError::Inconclusive { .. }) if refinements < MAX_REFINEMENTS => {
                refinements += 1;
                cfg.delta /= 10.0;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Outcome of one predicate evaluation during the threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    pub c: f64,
    pub admissible: bool,
    pub shot: ShotSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub model_ref: String,
    pub c_lo: f64,
    pub c_hi: f64,
    /// Predicate values at the bracket ends (always false, true).
    pub admissible_lo: bool,
    pub admissible_hi: bool,
    pub c0: f64,
    pub bracket_width: f64,
    pub tol_c: f64,
    pub eps: f64,
    pub delta: f64,
    pub c_sharp: f64,
    pub c_star: f64,
    /// Every shot in evaluation order.
    pub samples: Vec<SpeedSample>,
    /// Admissibility is false below and true above some speed among the samples.
    pub monotone: bool,
}

/// Whether admissibility is non-decreasing in `c` across `samples`.
pub fn is_monotone(samples: &[SpeedSample]) -> bool {
    let mut sorted: Vec<(f64, bool)> = samples.iter().map(|s| (s.c, s.admissible)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.windows(2).all(|w| w[0].1 <= w[1].1)
}

/// Brackets the threshold speed between the bounds by bisection on admissibility.
pub fn find_threshold(
    m: &ModelSpec,
    tol_c: f64,
    cfg: &ShootConfig,
) -> Result<SpeedReport, ShootError> {
    find_threshold_with(m, tol_c, cfg, &mut |c, cfg| shoot(m, c, cfg))
}

/// [`find_threshold`] with a caller-supplied shooter.
pub fn find_threshold_with<S>(
    m: &ModelSpec,
    tol_c: f64,
    cfg: &ShootConfig,
    shooter: &mut S,
) -> Result<SpeedReport, ShootError>
where
    S: FnMut(f64, &ShootConfig) -> Result<ShotResult, ShootError>,
{
    if !(tol_c > 0.0) {
        return Err(ShootError::InvalidParameter {
            name: "tol_c",
            value: tol_c,
        });
    }
    m.check_shootable()?;
    let bounds = compute_bounds(m, DEFAULT_BOUNDS_TOL)?;
    let lo = (bounds.c_sharp * (1.0 - 1e-3)).max(1e-6);
    let hi = bounds.c_star * (1.0 + 1e-3);
    let mut samples = Vec::new();
    let bracket = try_bisect_monotone::<_, ShootError>(
        |c| {
            let (adm, shot) = decide_with(c, cfg, shooter)?;
            samples.push(SpeedSample {
                c,
                admissible: adm,
                shot: shot.summary(),
            });
            Ok(adm)
        },
        lo,
        hi,
        tol_c,
    )?;
    let monotone = is_monotone(&samples);
    Ok(SpeedReport {
        model_ref: m.fingerprint(),
        c_lo: bracket.lo,
        c_hi: bracket.hi,
        admissible_lo: false,
        admissible_hi: true,
        c0: bracket.midpoint(),
        bracket_width: bracket.width(),
        tol_c,
        eps: cfg.eps,
        delta: cfg.delta,
        c_sharp: bounds.c_sharp,
        c_star: bounds.c_star,
        samples,
        monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    Sharp,
    Classical,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: RegimeClass,
    pub c: f64,
    pub delta: f64,
    pub exponent: Option<f64>,
    pub amplitude: Option<f64>,
    /// `A / C(c)`
    pub amplitude_ratio: Option<f64>,
}

/// Sharp iff `p ∈ [0.35, 0.65]` and `A` within 25% of `C(c)`; classical iff
/// `p ∈ [0.85, 1.15]`; anything else is indeterminate.
pub fn classify_regime(m: &ModelSpec, shot: &ShotResult) -> Result<RegimeReport, ShootError> {
    if !is_admissible(shot)? {
        return Err(ShootError::NotAdmissible { c: shot.c });
    }
    let ratio = shot.tail_amplitude.map(|a| a / m.sharp_amplitude(shot.c));
    let regime = match (shot.tail_exponent, ratio) {
        (Some(p), Some(r)) if (0.35..=0.65).contains(&p) && (0.75..=1.25).contains(&r) => {
            RegimeClass::Sharp
        }
        (Some(p), _) if (0.85..=1.15).contains(&p) => RegimeClass::Classical,
        _ => RegimeClass::Indeterminate,
    };
    Ok(RegimeReport {
        regime,
        c: shot.c,
        delta: shot.delta,
        exponent: shot.tail_exponent,
        amplitude: shot.tail_amplitude,
        amplitude_ratio: ratio,
    })
}

/// Stop offset used to examine the tail at a computed threshold speed.
///
/// The bisection converges onto the last speed whose trajectory still
/// levels off at a plateau of order `C²·δ`; the sharp `√(1−η)` law is only
/// visible well above that plateau, so the tail is fitted at `100·δ`.
pub fn threshold_diagnostic_delta(search_delta: f64) -> f64 {
    (100.0 * search_delta).min(MAX_OFFSET)
}

/// Stop offset of the shot a threshold profile is rebuilt from. The front-edge
/// refinement divides it by 10 up to three times, which needs to start above
/// the plateau but close enough to `η = 1` for the increments to settle.
pub fn threshold_profile_delta(search_delta: f64) -> f64 {
    (10.0 * search_delta).min(MAX_OFFSET)
}

/// Shoots at the bracket midpoint and classifies the tail.
pub fn classify_threshold(
    m: &ModelSpec,
    report: &SpeedReport,
    cfg: &ShootConfig,
) -> Result<(RegimeReport, ShotResult), ShootError> {
    let diag = cfg.with_delta(threshold_diagnostic_delta(report.delta));
    let shot = shoot(m, report.c0, &diag)?;
    let rep = classify_regime(m, &shot)?;
    Ok((rep, shot))
}

/// `(B(eps) − 1 + eps)/eps²` measured by integrating from `eps/10`.
pub fn measure_launch_coefficient(
    m: &ModelSpec,
    c: f64,
    eps: f64,
    integrator: &IntegratorConfig,
) -> Result<f64, ShootError> {
    m.check_shootable()?;
    let c2 = c * c;
    let start = eps / 10.0;
    let u0 = m.launch_coefficient() * start * start / c2;
    let sol = integrate_scalar(
        |eta, u| {
            let b = (1.0 - eta) + u;
            1.0 - c2 * u / (m.g(eta) * m.h(b) * m.f(eta, b))
        },
        start,
        eps,
        u0,
        integrator,
        &[],
        Output::Steps,
    )?;
    Ok(sol.y_end[0] / (eps * eps))
}
