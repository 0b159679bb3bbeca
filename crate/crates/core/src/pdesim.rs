//! Finite-volume simulation of the time-dependent system
//!
//! ```text
//! n_t = −f(n, b)
//! b_t = (g(n) h(b) b_x)_x + f(n, b)
//! ```
//!
//! on `[0, X]` with zero-flux boundaries and explicit Euler steps, used to
//! cross-check the shooting speed against the speed of an emerging front.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{audit_assumptions, ModelError, ModelSpec};
use crate::numerics::fit_line;

const MAX_HALVINGS: usize = 20;
const CLIP_BAND: f64 = 1e-10;
const AUDIT_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid PDE configuration: {0}")]
    InvalidConfig(String),
    #[error("time step halved {halvings} times at t = {t} without meeting the stability bound")]
    CflViolation { t: f64, halvings: usize },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("front lost: {0}")]
    FrontLost(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceDiffusivity {
    /// Mean of the two cell diffusivities.
    Arithmetic,
    /// Diffusivity of the cell with the larger `b`.
    UpwindWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `b = (1 − tanh((x − x0)/width))/2` (a sharp step for `width = 0`) and
    /// `n = 1 − b`, so `n ≡ 1` ahead of the step.
    Step { x0: f64, width: f64 },
    /// `n ≡ 1`, `b ≡ 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub length: f64,
    pub cells: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub initial: InitialData,
    /// Time between recorded front positions.
    pub sample_dt: f64,
    pub face: FaceDiffusivity,
    /// Switches the reaction terms off (pure degenerate diffusion).
    pub reaction: bool,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self {
            length: 400.0,
            cells: 4000,
            t_end: 300.0,
            cfl: 0.4,
            initial: InitialData::Step {
                x0: 20.0,
                width: 1.0,
            },
            sample_dt: 1.0,
            face: FaceDiffusivity::Arithmetic,
            reaction: true,
        }
    }
}

impl PdeConfig {
    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        let bad = |msg: &str| Err(PdeError::InvalidConfig(msg.to_string()));
        if self.cells < 100 {
            return bad("at least 100 cells are required");
        }
        if !(self.length > 0.0) || !(self.dx() <= 0.5) {
            return bad("cell size must be positive and at most 0.5");
        }
        if !(self.t_end > 0.0) || !(self.sample_dt > 0.0) {
            return bad("end time and sample interval must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("CFL factor must lie in (0, 1]");
        }
        if let InitialData::Step { x0, width } = self.initial {
            if !(x0 > 0.0 && x0 < self.length) || !(width >= 0.0) {
                return bad("step position must lie inside the domain with width >= 0");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeRun {
    pub config: PdeConfig,
    pub times: Vec<f64>,
    /// Rightmost crossing of `b = 1/2`; `NaN` while no crossing exists.
    pub fronts: Vec<f64>,
    /// Least-squares slope over the last half of the series.
    pub speed: Option<f64>,
    pub speed_stderr: Option<f64>,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// Largest change of `∫(n + b) dx` in one step.
    pub max_mass_step_change: f64,
    /// `|mass_final − mass_initial| / t_end`
    pub mass_rate: f64,
    /// `∫ b dx` at the start and end.
    pub b_mass_initial: f64,
    pub b_mass_final: f64,
    pub clip_count: usize,
    /// Largest distance from `[0, 1]` among clipped values.
    pub max_clip: f64,
    pub steps: usize,
    pub halvings: usize,
    /// Front position never decreased after the first quarter of the run.
    pub front_monotone: bool,
}

fn front_position(b: &[f64], dx: f64) -> Option<f64> {
    let n = b.len();
    let i = (0..n - 1).rev().find(|&i| b[i] >= 0.5 && b[i + 1] < 0.5)?;
    let t = (b[i] - 0.5) / (b[i] - b[i + 1]);
    Some((i as f64 + 0.5 + t) * dx)
}

fn fit_tail(times: &[f64], fronts: &[f64], t_from: f64) -> Option<(f64, f64, usize)> {
    let (t, x): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(fronts)
        .filter(|(t, x)| **t >= t_from && x.is_finite())
        .map(|(t, x)| (*t, *x))
        .unzip();
    let fit = fit_line(&t, &x)?;
    Some((fit.slope, fit.slope_stderr, fit.n))
}

/// Integrates the system to `t_end` and records the front position.
pub fn run_pde(m: &ModelSpec, cfg: &PdeConfig) -> Result<PdeRun, PdeError> {
    cfg.validate()?;
    audit_assumptions(m, AUDIT_GRID).into_result()?;
    let nc = cfg.cells;
    let dx = cfg.dx();
    let l2 = m.constants().l2;

    let b0: Vec<f64> = (0..nc)
        .map(|i| {
            let x = (i as f64 + 0.5) * dx;
            match cfg.initial {
                InitialData::Step { x0, width } if width > 0.0 => {
                    0.5 * (1.0 - ((x - x0) / width).tanh())
                }
                InitialData::Step { x0, .. } => {
                    if x < x0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                InitialData::Zero => 0.0,
            }
        })
        .collect();
    let mut n: Vec<f64> = b0.iter().map(|b| 1.0 - b).collect();
    let mut b = b0;

    let mass = |n: &[f64], b: &[f64]| dx * n.iter().zip(b).map(|(a, c)| a + c).sum::<f64>();
    let bmass = |b: &[f64]| dx * b.iter().sum::<f64>();
    let mass_initial = mass(&n, &b);
    let b_mass_initial = bmass(&b);

    let mut d = vec![0.0; nc];
    let mut flux = vec![0.0; nc + 1];
    let mut n_new = vec![0.0; nc];
    let mut b_new = vec![0.0; nc];
    let fill_d = |n: &[f64], b: &[f64], d: &mut [f64]| -> f64 {
        let mut dmax = 0.0f64;
        for i in 0..nc {
            d[i] = m.g(n[i]) * m.h(b[i]);
            dmax = dmax.max(d[i]);
        }
        dmax
    };

    let react_dt = if cfg.reaction && l2 > 0.0 {
        1.0 / (4.0 * l2)
    } else {
        f64::INFINITY
    };
    let mut dmax = fill_d(&n, &b, &mut d);
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    let mut next_sample = 0.0;
    let (mut steps, mut halvings, mut clip_count) = (0usize, 0usize, 0usize);
    let mut max_clip = 0.0f64;
    let mut max_mass_step = 0.0f64;
    let mut current_mass = mass_initial;

    while t < cfg.t_end {
        if t >= next_sample - 1e-12 {
            times.push(t);
            fronts.push(front_position(&b, dx).unwrap_or(f64::NAN));
            next_sample += cfg.sample_dt;
        }
        let diff_dt = if dmax > 0.0 {
            dx * dx / (2.0 * dmax)
        } else {
            f64::INFINITY
        };
        let mut dt = (cfg.cfl * diff_dt.min(react_dt))
            .min(cfg.t_end - t)
            .min((next_sample - t).max(1e-12));
        let mut tries = 0;
        loop {
            for i in 1..nc {
                let face = match cfg.face {
                    FaceDiffusivity::Arithmetic => 0.5 * (d[i - 1] + d[i]),
                    FaceDiffusivity::UpwindWeighted => {
                        if b[i - 1] >= b[i] {
                            d[i - 1]
                        } else {
                            d[i]
                        }
                    }
                };
                flux[i] = -face * (b[i] - b[i - 1]) / dx;
            }
            flux[0] = 0.0;
            flux[nc] = 0.0;
            for i in 0..nc {
                let r = if cfg.reaction { m.f(n[i], b[i]) } else { 0.0 };
                n_new[i] = n[i] - dt * r;
                b_new[i] = b[i] - dt * (flux[i + 1] - flux[i]) / dx + dt * r;
            }
            let new_dmax = fill_d(&n_new, &b_new, &mut d);
            let stable = new_dmax <= 0.0 || dt <= dx * dx / (2.0 * new_dmax);
            if stable {
                dmax = new_dmax;
                break;
            }
            tries += 1;
            halvings += 1;
            if tries > MAX_HALVINGS {
                return Err(PdeError::CflViolation { t, halvings: tries });
            }
            dt *= 0.5;
            fill_d(&n, &b, &mut d);
        }
        let mut clipped = false;
        for v in n_new.iter_mut().chain(b_new.iter_mut()) {
            if !v.is_finite() {
                return Err(PdeError::NonFiniteState { t });
            }
            if *v < -CLIP_BAND || *v > 1.0 + CLIP_BAND {
                clip_count += 1;
                clipped = true;
                max_clip = max_clip.max((-*v).max(*v - 1.0));
                *v = v.clamp(0.0, 1.0);
            }
        }
        std::mem::swap(&mut n, &mut n_new);
        std::mem::swap(&mut b, &mut b_new);
        if clipped {
            dmax = fill_d(&n, &b, &mut d);
        }
        let new_mass = mass(&n, &b);
        max_mass_step = max_mass_step.max((new_mass - current_mass).abs());
        current_mass = new_mass;
        t += dt;
        steps += 1;
    }
    times.push(t);
    fronts.push(front_position(&b, dx).unwrap_or(f64::NAN));

    let mass_final = mass(&n, &b);
    let fit = fit_tail(&times, &fronts, 0.5 * cfg.t_end);
    let cutoff = 0.25 * cfg.t_end;
    let front_monotone = times
        .iter()
        .zip(&fronts)
        .filter(|(t, _)| **t >= cutoff)
        .map(|(_, x)| *x)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 || w[0].is_nan() || w[1].is_nan());
    Ok(PdeRun {
        config: *cfg,
        times,
        fronts,
        speed: fit.map(|f| f.0),
        speed_stderr: fit.map(|f| f.1),
        mass_initial,
        mass_final,
        max_mass_step_change: max_mass_step,
        mass_rate: (mass_final - mass_initial).abs() / cfg.t_end,
        b_mass_initial,
        b_mass_final: bmass(&b),
        clip_count,
        max_clip,
        steps,
        halvings,
        front_monotone,
    })
}

/// Least-squares front speed after the first 25% of the run; needs at least
/// 20 front samples, all inside the domain.
pub fn measure_speed(run: &PdeRun) -> Result<(f64, f64), PdeError> {
    let t_end = run.times.last().copied().unwrap_or(0.0);
    let cutoff = 0.25 * t_end;
    let tail: Vec<(f64, f64)> = run
        .times
        .iter()
        .zip(&run.fronts)
        .filter(|(t, _)| **t >= cutoff)
        .map(|(t, x)| (*t, *x))
        .collect();
    if tail.iter().any(|(_, x)| !x.is_finite()) {
        return Err(PdeError::FrontLost(
            "level set b = 1/2 missing after the transient".into(),
        ));
    }
    let edge = run.config.length - run.config.dx();
    if tail.iter().any(|(_, x)| *x >= edge) {
        return Err(PdeError::FrontLost("front reached the domain end".into()));
    }
    if tail.len() < 20 {
        return Err(PdeError::FrontLost(format!(
            "only {} front samples after the transient",
            tail.len()
        )));
    }
    let (t, x): (Vec<f64>, Vec<f64>) = tail.into_iter().unzip();
    let fit =
        fit_line(&t, &x).ok_or_else(|| PdeError::FrontLost("degenerate front series".into()))?;
    Ok((fit.slope, fit.slope_stderr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reaction: bool) -> PdeConfig {
        PdeConfig {
            length: 60.0,
            cells: 300,
            t_end: 40.0,
            initial: InitialData::Step {
                x0: 10.0,
                width: 1.0,
            },
            reaction,
            ..Default::default()
        }
    }

    #[test]
    fn pure_diffusion_conserves_b() {
        let run = run_pde(&ModelSpec::smga(), &small(false)).unwrap();
        let rate = (run.b_mass_final - run.b_mass_initial).abs() / run.config.t_end;
        assert!(rate <= 1e-8, "{rate}");
        assert_eq!(run.clip_count, 0);
    }

    #[test]
    fn total_mass_is_conserved_with_reaction() {
        let run = run_pde(&ModelSpec::smga(), &small(true)).unwrap();
        assert!(run.max_mass_step_change <= 1e-6);
        assert!(run.front_monotone);
    }

    #[test]
    fn zero_data_is_steady() {
        let cfg = PdeConfig {
            initial: InitialData::Zero,
            ..small(true)
        };
        let run = run_pde(&ModelSpec::smga(), &cfg).unwrap();
        assert_eq!(run.mass_final, run.mass_initial);
        assert!(run.fronts.iter().all(|x| x.is_nan()));
        assert!(matches!(measure_speed(&run), Err(PdeError::FrontLost(_))));
    }

    #[test]
    fn synthetic_front_speed() {
        // deterministic pseudo-noise with standard deviation near 0.01
        let times: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let fronts: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(i, t)| 0.7 * t + 0.0173 * ((i as f64 * 12.9898).sin() * 43758.5453).fract())
            .collect();
        let run = PdeRun {
            config: PdeConfig::default(),
            times,
            fronts,
            speed: None,
            speed_stderr: None,
            mass_initial: 0.0,
            mass_final: 0.0,
            max_mass_step_change: 0.0,
            mass_rate: 0.0,
            b_mass_initial: 0.0,
            b_mass_final: 0.0,
            clip_count: 0,
            max_clip: 0.0,
            steps: 0,
            halvings: 0,
            front_monotone: true,
        };
        let (v, se) = measure_speed(&run).unwrap();
        assert!((v - 0.7).abs() < 0.01);
        assert!(se < 0.01);
    }

    #[test]
    fn short_domain_loses_front() {
        let cfg = PdeConfig {
            length: 20.0,
            cells: 100,
            t_end: 60.0,
            initial: InitialData::Step {
                x0: 5.0,
                width: 1.0,
            },
            ..Default::default()
        };
        let run = run_pde(&ModelSpec::smga(), &cfg).unwrap();
        assert!(matches!(measure_speed(&run), Err(PdeError::FrontLost(_))));
    }

    #[test]
    fn invalid_configs() {
        let m = ModelSpec::smga();
        for cfg in [
            PdeConfig {
                cells: 50,
                ..Default::default()
            },
            PdeConfig {
                cells: 100,
                ..Default::default()
            },
            PdeConfig {
                cfl: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(run_pde(&m, &cfg), Err(PdeError::InvalidConfig(_))));
        }
    }
}
