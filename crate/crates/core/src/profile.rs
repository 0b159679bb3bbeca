//! Wave profiles `(η(ξ), β(ξ))` rebuilt from a shot, front-edge detection and
//! the first-integral audit `g(η)h(β)β' + cβ + cη − c = 0`.
//!
//! Along the wave `c·η' = f(η, β)`, so `ξ(η) = ∫_{η0}^{η} c / f(s, B(s)) ds`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelSpec;
use crate::numerics::{quad_adaptive, QuadError, SingularEnds};
use crate::shooting::{is_admissible, shoot, ShootConfig, ShootError, ShotResult, MAX_REFINEMENTS};

pub const DEFAULT_ANCHOR: f64 = 0.5;
/// Backward window ends once η drops below this.
pub const BACKWARD_ETA: f64 = 1e-8;
/// Decade increment of ξ below which the front edge counts as finite.
pub const EDGE_SETTLE_TOL: f64 = 1e-4;
/// Relative change of consecutive decade increments accepted as logarithmic growth.
pub const LOG_GROWTH_RTOL: f64 = 0.05;
const QUAD_TOL: f64 = 1e-13;
const SERIES_PER_DECADE: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("speed c = {c} is not admissible; no wave profile exists")]
    NotAdmissible { c: f64 },
    #[error("anchor eta0 = {eta0} lies outside the shot range")]
    InvalidAnchor { eta0: f64 },
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error("quadrature failed near eta = {eta}: {source}")]
    Quad { source: QuadError, eta: f64 },
    #[error(
        "front edge undecided after {refinements} refinements at c = {c} \
         (last decade increments {increments:?})"
    )]
    Indeterminate {
        c: f64,
        refinements: usize,
        increments: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrontEdge {
    /// `τ` lies `tau_offset` to the right of the anchor.
    Finite {
        tau_offset: f64,
    },
    Infinite,
    Indeterminate,
}

impl FrontEdge {
    pub fn is_finite(&self) -> bool {
        matches!(self, FrontEdge::Finite { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEdgeReport {
    pub edge: FrontEdge,
    pub c: f64,
    /// Stop offset of the shot that settled the question.
    pub delta: f64,
    pub refinements: usize,
    /// `(δ, ∫ c/f over 1−η ∈ [δ, 10δ])` for every shot examined.
    pub increments: Vec<(f64, f64)>,
    /// `ξ(1 − δ)` relative to the anchor.
    pub xi_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub c: f64,
    pub eta0: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub beta: Vec<f64>,
    pub dbeta: Vec<f64>,
    pub tau: FrontEdge,
    pub sigma_equals_tau: bool,
    pub residual_sup: f64,
    /// `β'` at the last sample and its ratio to `−c/(g(1)h'(0))`.
    pub edge_slope: f64,
    pub edge_slope_ratio: f64,
    /// Largest relative mismatch between `dβ` and a central difference of `β` in `ξ`.
    pub derivative_mismatch: f64,
    /// Largest relative excursion of `η` outside the backward exponential envelope.
    pub envelope_violation: f64,
    /// Set when quadrature failed before `η = 1 − δ`; the profile stops there.
    pub truncated_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sup: f64,
    pub rms: f64,
    pub argmax: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// `∫_a^b c/f(s, B(s)) ds` on the shot's interpolant, split at sample nodes.
pub fn xi_integral(m: &ModelSpec, shot: &ShotResult, a: f64, b: f64) -> Result<f64, ProfileError> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let c = shot.c;
    let integrand = |s: f64| c / m.f(s, shot.b_at(s).unwrap_or(f64::NAN));
    let start = shot.eta.partition_point(|&e| e <= lo);
    let end = shot.eta.partition_point(|&e| e < hi);
    let mut knots = vec![lo];
    knots.extend_from_slice(&shot.eta[start..end]);
    knots.push(hi);
    let mut total = 0.0;
    for w in knots.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        total += quad_adaptive(integrand, w[0], w[1], QUAD_TOL, SingularEnds::None)
            .map_err(|source| ProfileError::Quad { source, eta: w[0] })?
            .value;
    }
    Ok(sign * total)
}

fn decade_increment(m: &ModelSpec, shot: &ShotResult) -> Result<(f64, f64), ProfileError> {
    let d = shot.delta;
    let d1 = xi_integral(m, shot, 1.0 - 10.0 * d, 1.0 - d)?;
    let d2 = xi_integral(m, shot, 1.0 - 100.0 * d, 1.0 - 10.0 * d)?;
    Ok((d1, d2))
}

/// Decides whether the front edge `τ` is finite.
///
/// Within each shot the ξ-increment over the last decade `1−η ∈ [δ, 10δ]` is
/// compared with the one before. A vanishing increment means the improper
/// integral has settled; equal increments mean logarithmic growth, so
/// `τ = +∞`. Otherwise `δ` is divided by 10 and the speed re-shot.
pub fn front_edge(
    m: &ModelSpec,
    shot: &ShotResult,
    eta0: f64,
    cfg: &ShootConfig,
) -> Result<FrontEdgeReport, ProfileError> {
    if !is_admissible(shot)? {
        return Err(ProfileError::NotAdmissible { c: shot.c });
    }
    let mut increments = Vec::new();
    let mut current = shot.clone();
    for refinements in 0..=MAX_REFINEMENTS {
        let (d1, d2) = decade_increment(m, &current)?;
        increments.push((current.delta, d1));
        let edge = if d1 < EDGE_SETTLE_TOL {
            Some(FrontEdge::Finite { tau_offset: 0.0 })
        } else if (d1 / d2 - 1.0).abs() <= LOG_GROWTH_RTOL {
            Some(FrontEdge::Infinite)
        } else {
            None
        };
        if let Some(edge) = edge {
            let xi_end = xi_integral(m, &current, eta0, current.eta_end)?;
            let edge = match edge {
                FrontEdge::Finite { .. } => {
                    // remainder of ∫ c/f beyond 1−δ for a tail no steeper than √(1−η)
                    let rest =
                        2.0 * current.c * current.delta / (m.constants().dfdb10 * current.b_end);
                    FrontEdge::Finite {
                        tau_offset: xi_end + rest,
                    }
                }
                e => e,
            };
            return Ok(FrontEdgeReport {
                edge,
                c: shot.c,
                delta: current.delta,
                refinements,
                increments,
                xi_end,
            });
        }
        if refinements < MAX_REFINEMENTS {
            let next = ShootConfig {
                eps: shot.eps,
                delta: current.delta / 10.0,
                ..*cfg
            };
            current = shoot(m, shot.c, &next)?;
        }
    }
    Err(ProfileError::Indeterminate {
        c: shot.c,
        refinements: MAX_REFINEMENTS,
        increments: increments.iter().map(|p| p.1).collect(),
    })
}

/// Rebuilds the profile with refinement shots driven by the default settings.
pub fn reconstruct(
    m: &ModelSpec,
    shot: &ShotResult,
    eta0: f64,
) -> Result<WaveProfile, ProfileError> {
    reconstruct_with(m, shot, eta0, &ShootConfig::default())
}

pub fn reconstruct_with(
    m: &ModelSpec,
    shot: &ShotResult,
    eta0: f64,
    cfg: &ShootConfig,
) -> Result<WaveProfile, ProfileError> {
    if !is_admissible(shot)? {
        return Err(ProfileError::NotAdmissible { c: shot.c });
    }
    if !(eta0 > shot.eps && eta0 < shot.eta_end) {
        return Err(ProfileError::InvalidAnchor { eta0 });
    }
    let c = shot.c;
    let k = shot.launch_coefficient / (c * c);

    // nodes: launch series below eps, then the shot samples
    let mut eta = Vec::new();
    let mut gap = Vec::new();
    let decades = (shot.eps / (0.5 * BACKWARD_ETA)).log10().max(0.0);
    let n_series = (decades * SERIES_PER_DECADE as f64).ceil() as usize;
    for i in (1..=n_series).rev() {
        let e = shot.eps * 10f64.powf(-decades * i as f64 / n_series as f64);
        eta.push(e);
        gap.push(k * e * e);
    }
    eta.extend_from_slice(&shot.eta);
    gap.extend_from_slice(&shot.gap);

    // cumulative ξ from the first node
    let integrand = |s: f64| c / m.f(s, shot.b_at(s).unwrap_or(f64::NAN));
    let mut cum = Vec::with_capacity(eta.len());
    cum.push(0.0);
    let mut truncated_at = None;
    for w in eta.windows(2) {
        match quad_adaptive(integrand, w[0], w[1], QUAD_TOL, SingularEnds::None) {
            Ok(r) => cum.push(cum.last().unwrap() + r.value),
            Err(source) => {
                if w[0] <= eta0 {
                    return Err(ProfileError::Quad { source, eta: w[0] });
                }
                truncated_at = Some(w[0]);
                break;
            }
        }
    }
    let n = cum.len();
    eta.truncate(n);
    gap.truncate(n);
    let j = eta.partition_point(|&e| e <= eta0) - 1;
    let anchor = cum[j] + xi_integral(m, shot, eta[j], eta0)?;
    let xi: Vec<f64> = cum.iter().map(|v| v - anchor).collect();

    let beta: Vec<f64> = eta.iter().zip(&gap).map(|(e, u)| (1.0 - e) + u).collect();
    let dbeta: Vec<f64> = eta
        .iter()
        .zip(&beta)
        .zip(&gap)
        .map(|((&e, &b), &u)| -c * u / (m.g(e) * m.h(b)))
        .collect();

    let mut mismatch = 0.0f64;
    for i in 1..n.saturating_sub(1) {
        // second-order three-point difference on a non-uniform grid
        let (h1, h2) = (xi[i] - xi[i - 1], xi[i + 1] - xi[i]);
        let fd = -h2 / (h1 * (h1 + h2)) * beta[i - 1]
            + (h2 - h1) / (h1 * h2) * beta[i]
            + h1 / (h2 * (h1 + h2)) * beta[i + 1];
        if dbeta[i].abs() > 1e-8 {
            mismatch = mismatch.max(((fd - dbeta[i]) / dbeta[i]).abs());
        }
    }

    let cst = m.constants();
    let mut envelope = 0.0f64;
    for (&x, &e) in xi.iter().zip(&eta) {
        if x > 0.0 {
            break;
        }
        let lower = eta0 * (cst.l2 * x / c).exp();
        let upper = eta0 * (cst.l1 * (1.0 - eta0) * x / c).exp();
        envelope = envelope.max((lower - e) / e).max((e - upper) / e);
    }

    let tau = match front_edge(m, shot, eta0, cfg) {
        Ok(r) => r.edge,
        Err(ProfileError::Indeterminate { .. }) => FrontEdge::Indeterminate,
        Err(e) => return Err(e),
    };

    let edge_slope = *dbeta.last().unwrap_or(&f64::NAN);
    let mut profile = WaveProfile {
        c,
        eta0,
        xi,
        eta,
        beta,
        dbeta,
        tau,
        sigma_equals_tau: shot.admissible,
        residual_sup: 0.0,
        edge_slope,
        edge_slope_ratio: edge_slope / m.sharp_edge_slope(c),
        derivative_mismatch: mismatch,
        envelope_violation: envelope,
        truncated_at,
    };
    profile.residual_sup = check_first_integral(m, &profile).sup;
    Ok(profile)
}

/// `|g(η)h(β)β' + cβ + cη − c|` at every sample.
pub fn residuals(m: &ModelSpec, p: &WaveProfile) -> Vec<f64> {
    let c = p.c;
    p.eta
        .iter()
        .zip(&p.beta)
        .zip(&p.dbeta)
        .map(|((&e, &b), &db)| (m.g(e) * m.h(b) * db + c * b + c * e - c).abs())
        .collect()
}

/// Passes iff the sup residual is at most `1e-6·max(1, c)`.
pub fn check_first_integral(m: &ModelSpec, p: &WaveProfile) -> ResidualReport {
    let r = residuals(m, p);
    let (argmax, sup) =
        r.iter().copied().enumerate().fold(
            (0, 0.0f64),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let rms = if r.is_empty() {
        0.0
    } else {
        (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
    };
    let tolerance = 1e-6 * p.c.max(1.0);
    ResidualReport {
        sup,
        rms,
        argmax,
        tolerance,
        passed: sup <= tolerance,
    }
}

/// Appends the rest state `(η, β) = (1, 0)` on `(τ, τ + length]` for finite edges.
pub fn append_rest_state(p: &mut WaveProfile, length: f64, samples: usize) {
    let FrontEdge::Finite { tau_offset } = p.tau else {
        return;
    };
    let start = tau_offset.max(*p.xi.last().unwrap_or(&tau_offset));
    for i in 0..samples.max(1) {
        p.xi.push(start + length * i as f64 / samples.max(1) as f64);
        p.eta.push(1.0);
        p.beta.push(0.0);
        p.dbeta.push(0.0);
    }
}

/// One row of a uniformly resampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub xi: f64,
    pub eta: f64,
    pub beta: f64,
    pub dbeta: f64,
}

/// Linear resampling onto `n` equispaced ξ values over `[xi_min, xi_max]`
/// (clipped to the sampled range).
pub fn resample_uniform(p: &WaveProfile, xi_min: f64, xi_max: f64, n: usize) -> Vec<ProfileRow> {
    let len = p.xi.len();
    if len < 2 || n < 2 {
        return Vec::new();
    }
    let lo = xi_min.max(p.xi[0]);
    let hi = xi_max.min(p.xi[len - 1]);
    if !(hi > lo) {
        return Vec::new();
    }
    (0..n)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let i = p.xi.partition_point(|&v| v <= x).clamp(1, len - 1) - 1;
            let span = p.xi[i + 1] - p.xi[i];
            let t = if span > 0.0 {
                (x - p.xi[i]) / span
            } else {
                0.0
            };
            let lerp = |v: &[f64]| v[i] + t * (v[i + 1] - v[i]);
            ProfileRow {
                xi: x,
                eta: lerp(&p.eta),
                beta: lerp(&p.beta),
                dbeta: lerp(&p.dbeta),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical() -> (ModelSpec, ShotResult) {
        let m = ModelSpec::smga();
        let s = shoot(&m, 1.2, &ShootConfig::default()).unwrap();
        (m, s)
    }

    #[test]
    fn classical_profile_is_monotone_with_infinite_edge() {
        let (m, s) = classical();
        let p = reconstruct(&m, &s, 0.5).unwrap();
        assert!(p.xi.windows(2).all(|w| w[1] > w[0]));
        assert!(p.eta.windows(2).all(|w| w[1] > w[0]));
        assert!(p.beta.windows(2).all(|w| w[1] < w[0]));
        assert!(p.eta[0] < BACKWARD_ETA);
        assert_eq!(p.tau, FrontEdge::Infinite);
        assert!(check_first_integral(&m, &p).passed);
        assert!(p.envelope_violation <= 1e-9);
        assert!(p.edge_slope.abs() < 1e-3);
        for (e, b) in p.eta.iter().zip(&p.beta) {
            assert!(e + b >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn anchor_shift_is_a_translation() {
        let (m, s) = classical();
        let a = reconstruct(&m, &s, 0.5).unwrap();
        let b = reconstruct(&m, &s, 0.3).unwrap();
        let shift = b.xi[0] - a.xi[0];
        let worst =
            a.xi.iter()
                .zip(&b.xi)
                .map(|(x, y)| (y - x - shift).abs())
                .fold(0.0, f64::max);
        assert!(worst <= 1e-6);
    }

    #[test]
    fn perturbed_sample_fails_audit() {
        let (m, s) = classical();
        let mut p = reconstruct(&m, &s, 0.5).unwrap();
        let i = p.beta.len() / 2;
        p.beta[i] += 1e-3;
        let r = check_first_integral(&m, &p);
        assert!(!r.passed);
        assert_eq!(r.argmax, i);
    }

    #[test]
    fn rest_state_has_zero_residual() {
        let (m, s) = classical();
        let mut p = reconstruct(&m, &s, 0.5).unwrap();
        p.tau = FrontEdge::Finite {
            tau_offset: *p.xi.last().unwrap(),
        };
        let before = p.xi.len();
        append_rest_state(&mut p, 5.0, 10);
        let r = residuals(&m, &p);
        assert!(r[before..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_trajectory_has_infinite_edge() {
        // B = 1 − η exactly: ∫ c/(s(1−s)) diverges logarithmically at 1
        let m = ModelSpec::smga();
        let mut s = shoot(&m, 1.2, &ShootConfig::default()).unwrap();
        for i in 0..s.eta.len() {
            s.b[i] = 1.0 - s.eta[i];
            s.db[i] = -1.0;
        }
        let (d1, d2) = decade_increment(&m, &s).unwrap();
        assert!((d1 / d2 - 1.0).abs() < 0.01);
        assert!((d1 - 1.2 * 10f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn rejects_non_admissible_and_bad_anchor() {
        let m = ModelSpec::smga();
        let s = shoot(&m, 0.3, &ShootConfig::default()).unwrap();
        assert!(matches!(
            reconstruct(&m, &s, 0.5),
            Err(ProfileError::NotAdmissible { .. })
        ));
        let (m, s) = classical();
        assert!(matches!(
            reconstruct(&m, &s, 1.5),
            Err(ProfileError::InvalidAnchor { .. })
        ));
    }

    #[test]
    fn resampling_is_uniform() {
        let (m, s) = classical();
        let p = reconstruct(&m, &s, 0.5).unwrap();
        let rows = resample_uniform(&p, -10.0, 10.0, 21);
        assert_eq!(rows.len(), 21);
        assert!((rows[1].xi - rows[0].xi - 1.0).abs() < 1e-12);
        assert!(rows.windows(2).all(|w| w[1].eta > w[0].eta));
    }
}
