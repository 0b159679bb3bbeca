//! Explicit Dormand–Prince 5(4) integrator with continuous output and event location.
//!
//! The embedded pair advances with the fifth-order solution and uses the
//! fourth-order companion for local error control (PI step-size controller).
//! Dense output is the standard fourth-order continuous extension, so events
//! and grid samples are evaluated without extra right-hand-side calls.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Tolerances and step budget for [`integrate_ivp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on attempted steps (accepted plus rejected).
    pub max_steps: usize,
    /// Smallest admissible step as a fraction of the interval length.
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            min_step: 1e-14,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_steps > 0
            && self.min_step > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite();
        if ok {
            Ok(())
        } else {
            Err(IntegrationError::InvalidConfig)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({steps}) exceeded at t = {t:e}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("integration interval must satisfy t0 < t1 (got {t0} .. {t1})")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("right-hand side is not finite at the initial point t = {t:e}")]
    NonFiniteStart { t: f64 },
    #[error("integrator tolerances must be positive and finite")]
    InvalidConfig,
}

impl IntegrationError {
    /// Independent-variable value where the failure was detected.
    pub fn last_t(&self) -> Option<f64> {
        match *self {
            Self::StepSizeUnderflow { t, .. } | Self::MaxStepsExceeded { t, .. } => Some(t),
            Self::NonFiniteStart { t } => Some(t),
            _ => None,
        }
    }
}

/// Which sign changes of an event function count as a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    Any,
    /// positive to non-positive
    Falling,
    /// negative to non-negative
    Rising,
}

impl Crossing {
    fn triggered(self, before: f64, after: f64) -> bool {
        let falling = before > 0.0 && after <= 0.0;
        let rising = before < 0.0 && after >= 0.0;
        match self {
            Crossing::Any => falling || rising,
            Crossing::Falling => falling,
            Crossing::Rising => rising,
        }
    }
}

type EventFn<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>;

/// A scalar function of the state whose zero crossings are located during integration.
pub struct EventSpec<'a> {
    func: EventFn<'a>,
    pub direction: Crossing,
    pub terminal: bool,
}

impl<'a> EventSpec<'a> {
    pub fn new<G>(func: G, direction: Crossing, terminal: bool) -> Self
    where
        G: Fn(f64, &[f64]) -> f64 + Send + Sync + 'a,
    {
        Self {
            func: Box::new(func),
            direction,
            terminal,
        }
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> f64 {
        (self.func)(t, y)
    }
}

impl std::fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSpec")
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Position of the event in the `events` slice passed to the integrator.
    pub index: usize,
    pub t: f64,
    pub y: Vec<f64>,
}

/// What the returned [`Solution`] keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    /// Every accepted step, including the initial point.
    Steps,
    /// Dense-output samples at the given (ascending) abscissae only.
    Grid(Vec<f64>),
    /// Every accepted step plus the interpolation data for [`Solution::eval`].
    Dense,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Interpolation data for one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment {
    t0: f64,
    h: f64,
    // r[0..5] laid out as five consecutive blocks of length `dim`.
    r: Vec<f64>,
}

impl DenseSegment {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = out.len();
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        for (i, o) in out.iter_mut().enumerate() {
            let r = |k: usize| self.r[k * n + i];
            *o = r(0) + th * (r(1) + th1 * (r(2) + th * (r(3) + th1 * r(4))));
        }
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub t_end: f64,
    pub y_end: Vec<f64>,
    pub events: Vec<EventRecord>,
    /// Index of the terminal event that stopped integration, if any.
    pub terminated_by: Option<usize>,
    pub stats: StepStats,
    dense: Vec<DenseSegment>,
}

impl Solution {
    /// Evaluates the continuous extension at `t`; requires [`Output::Dense`].
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let first = self.dense.first()?;
        if t < first.t0 || t > self.t_end {
            return None;
        }
        let idx = self
            .dense
            .partition_point(|s| s.t_end() < t)
            .min(self.dense.len() - 1);
        let mut out = vec![0.0; self.y_end.len()];
        self.dense[idx].eval_into(t, &mut out);
        Some(out)
    }

    pub fn has_dense_output(&self) -> bool {
        !self.dense.is_empty()
    }
}

fn wrms(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = rhs(t, y)` forward from `t0` to `t1`.
///
/// Terminal events stop the integration at the located crossing; the
/// crossing time is refined by bisection on the continuous extension.
pub fn integrate_ivp<F>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    config: &IntegratorConfig,
    events: &[EventSpec<'_>],
    output: Output,
) -> Result<Solution, IntegrationError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    config.validate()?;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrationError::InvalidInterval { t0, t1 });
    }
    let n = y0.len();
    let span = t1 - t0;
    let h_min = config.min_step * span;

    let mut stats = StepStats::default();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut errv = vec![0.0; n];
    let mut y = y0.to_vec();
    let mut t = t0;

    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;
    if !all_finite(&k[0]) || !all_finite(&y) {
        return Err(IntegrationError::NonFiniteStart { t });
    }

    let (keep_steps, keep_dense, mut grid) = match output {
        Output::Steps => (true, false, Vec::new()),
        Output::Grid(g) => (false, false, g),
        Output::Dense => (true, true, Vec::new()),
    };
    let mut grid_idx = 0;
    let mut out_t = Vec::new();
    let mut out_y = Vec::new();
    if keep_steps {
        out_t.push(t);
        out_y.push(y.clone());
    }
    grid.retain(|g| g.is_finite());
    while grid_idx < grid.len() && grid[grid_idx] <= t0 {
        if grid[grid_idx] == t0 {
            out_t.push(t0);
            out_y.push(y.clone());
        }
        grid_idx += 1;
    }

    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();
    let mut records = Vec::new();
    let mut dense_store = Vec::new();
    let mut terminated_by = None;

    let mut h = initial_step(&rhs, t, &y, &k[0], t1, config, &mut stats);
    let mut fac_old = 1e-4_f64;
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= config.max_steps {
            return Err(IntegrationError::MaxStepsExceeded {
                t,
                steps: config.max_steps,
            });
        }
        let mut last = false;
        if t + h >= t1 || t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h < h_min && !last {
            return Err(IntegrationError::StepSizeUnderflow { t, h });
        }

        // stages
        let (k1, rest) = k.split_at_mut(1);
        let k1 = &k1[0];
        let [k2, k3, k4, k5, k6, k7] = rest else {
            unreachable!()
        };
        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, k5);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + h };
        rhs(t_new, &ytmp, k6);
        for i in 0..n {
            ynew[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &ynew, k7);
        stats.rhs_evals += 6;
        for i in 0..n {
            errv[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let mut err = wrms(&errv, &y, &ynew, config);
        if !err.is_finite() || !all_finite(&ynew) || !all_finite(k7) {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            let need_dense = keep_dense || !events.is_empty() || grid_idx < grid.len();
            let seg = need_dense.then(|| {
                let mut r = vec![0.0; 5 * n];
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    r[i] = y[i];
                    r[n + i] = ydiff;
                    r[2 * n + i] = bspl;
                    r[3 * n + i] = ydiff - h * k7[i] - bspl;
                    r[4 * n + i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                DenseSegment { t0: t, h, r }
            });

            // events
            let mut stop_at: Option<(f64, usize)> = None;
            if !events.is_empty() {
                let seg = seg.as_ref().expect("dense segment required for events");
                let mut hits = Vec::new();
                for (idx, ev) in events.iter().enumerate() {
                    let g_new = ev.eval(t_new, &ynew);
                    if ev.direction.triggered(g_prev[idx], g_new) {
                        let te = locate_event(ev, seg, t, t_new, g_prev[idx], &mut ytmp);
                        hits.push((te, idx));
                    }
                    g_prev[idx] = g_new;
                }
                hits.sort_by(|a, b| a.0.total_cmp(&b.0));
                let cutoff = hits
                    .iter()
                    .find(|(_, idx)| events[*idx].terminal)
                    .map(|&(te, idx)| (te, idx));
                for &(te, idx) in &hits {
                    if cutoff.is_some_and(|(tc, _)| te > tc) {
                        continue;
                    }
                    let mut ye = vec![0.0; n];
                    seg.eval_into(te, &mut ye);
                    records.push(EventRecord {
                        index: idx,
                        t: te,
                        y: ye,
                    });
                }
                stop_at = cutoff;
            }

            let t_reached = stop_at.map_or(t_new, |(te, _)| te);
            if let Some(seg) = seg.as_ref() {
                while grid_idx < grid.len() && grid[grid_idx] <= t_reached {
                    let mut yg = vec![0.0; n];
                    seg.eval_into(grid[grid_idx], &mut yg);
                    out_t.push(grid[grid_idx]);
                    out_y.push(yg);
                    grid_idx += 1;
                }
            }

            if let Some((te, idx)) = stop_at {
                let mut ye = vec![0.0; n];
                seg.as_ref().unwrap().eval_into(te, &mut ye);
                if keep_steps {
                    out_t.push(te);
                    out_y.push(ye.clone());
                }
                if let Some(mut s) = seg {
                    if keep_dense {
                        // keep the segment but cap its range at the event
                        s.h = s.h.max(te - s.t0);
                        dense_store.push(s);
                    }
                }
                terminated_by = Some(idx);
                t = te;
                y = ye;
                break;
            }

            if keep_dense {
                dense_store.push(seg.unwrap());
            }
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            let (head, tail) = k.split_at_mut(6);
            std::mem::swap(&mut head[0], &mut tail[0]);
            if keep_steps {
                out_t.push(t);
                out_y.push(y.clone());
            }
            if last {
                break;
            }

            let fac11 = err.max(1e-300).powf(expo1);
            let mut fac = fac11 / fac_old.powf(beta);
            fac = (fac / 0.9).clamp(0.1, 5.0);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = err.max(1e-4);
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            if err.is_finite() {
                let fac11 = err.powf(expo1);
                h /= (fac11 / 0.9).min(5.0);
            } else {
                h *= 0.25;
            }
        }
    }

    Ok(Solution {
        t: out_t,
        y: out_y,
        t_end: t,
        y_end: y,
        events: records,
        terminated_by,
        stats,
        dense: dense_store,
    })
}

/// Convenience wrapper for scalar equations.
pub fn integrate_scalar<F>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: f64,
    config: &IntegratorConfig,
    events: &[EventSpec<'_>],
    output: Output,
) -> Result<Solution, IntegrationError>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_ivp(
        |t, y, dy| dy[0] = rhs(t, y[0]),
        t0,
        t1,
        &[y0],
        config,
        events,
        output,
    )
}

fn locate_event(
    ev: &EventSpec<'_>,
    seg: &DenseSegment,
    t_lo: f64,
    t_hi: f64,
    g_lo: f64,
    buf: &mut [f64],
) -> f64 {
    let (mut lo, mut hi) = (t_lo, t_hi);
    let glo = g_lo;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        seg.eval_into(mid, buf);
        let gm = ev.eval(mid, buf);
        if ev.direction.triggered(glo, gm) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn initial_step<F>(
    rhs: &F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    t1: f64,
    cfg: &IntegratorConfig,
    stats: &mut StepStats,
) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let span = t1 - t;
    let sc: Vec<f64> = y
        .iter()
        .map(|v| cfg.abs_tol + cfg.rel_tol * v.abs())
        .collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    rhs(t + h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if !d2.is_finite() {
        h0 * 1e-3
    } else if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).max(cfg.min_step * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_cfg(rel: f64) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: rel,
            abs_tol: rel * 1e-2,
            ..Default::default()
        }
    }

    #[test]
    fn exponential_decay_to_one() {
        let sol = integrate_scalar(
            |_, y| -y,
            0.0,
            1.0,
            1.0,
            &IntegratorConfig::default(),
            &[],
            Output::Steps,
        )
        .unwrap();
        assert!((sol.y_end[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(sol.t_end, 1.0);
        assert_eq!(sol.t.len(), sol.stats.accepted + 1);
    }

    #[test]
    fn harmonic_oscillator_system() {
        let cfg = IntegratorConfig::default();
        let sol = integrate_ivp(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            2.0 * std::f64::consts::PI,
            &[1.0, 0.0],
            &cfg,
            &[],
            Output::Steps,
        )
        .unwrap();
        assert!((sol.y_end[0] - 1.0).abs() < 1e-8);
        assert!(sol.y_end[1].abs() < 1e-8);
    }

    #[test]
    fn rising_and_falling_filters() {
        let cfg = IntegratorConfig::default();
        let falling = [EventSpec::new(|_, y| y[0] - 0.5, Crossing::Falling, false)];
        let sol =
            integrate_scalar(|_, _| 1.0, 0.0, 1.0, 0.0, &cfg, &falling, Output::Steps).unwrap();
        assert!(sol.events.is_empty());

        let rising = [EventSpec::new(|_, y| y[0] - 0.5, Crossing::Rising, false)];
        let sol =
            integrate_scalar(|_, _| 1.0, 0.0, 1.0, 0.0, &cfg, &rising, Output::Steps).unwrap();
        assert_eq!(sol.events.len(), 1);
        assert!((sol.events[0].t - 0.5).abs() < 1e-12);
        assert_eq!(sol.t_end, 1.0);
    }

    #[test]
    fn terminal_event_stops_integration() {
        let cfg = IntegratorConfig::default();
        let ev = [EventSpec::new(|_, y| y[0] - 0.25, Crossing::Falling, true)];
        // y = exp(-t) hits 1/4 at ln 4
        let sol = integrate_scalar(|_, y| -y, 0.0, 5.0, 1.0, &cfg, &ev, Output::Dense).unwrap();
        assert_eq!(sol.terminated_by, Some(0));
        assert!((sol.t_end - 4f64.ln()).abs() < 1e-9);
        assert!((sol.y_end[0] - 0.25).abs() < 1e-9);
        assert!(sol.eval(1.0).is_some());
        assert!(sol.eval(2.0).is_none());
    }

    #[test]
    fn grid_output_matches_solution() {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let sol = integrate_scalar(
            |_, y| -y,
            0.0,
            1.0,
            1.0,
            &IntegratorConfig::default(),
            &[],
            Output::Grid(grid.clone()),
        )
        .unwrap();
        assert_eq!(sol.t, grid);
        for (t, y) in sol.t.iter().zip(&sol.y) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let sol = integrate_scalar(
            |t, y| t.cos() * y,
            0.0,
            3.0,
            1.0,
            &IntegratorConfig::default(),
            &[],
            Output::Dense,
        )
        .unwrap();
        for i in 0..=300 {
            let t = i as f64 * 0.01;
            let y = sol.eval(t).unwrap()[0];
            assert!((y - t.sin().exp()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn observed_order_matches_pair() {
        // global error against step count: err ~ N^(-5) for the propagated solution
        let mut log_n = Vec::new();
        let mut log_err = Vec::new();
        for tol in [1e-5, 1e-6, 1e-7, 1e-8, 1e-9] {
            let sol = integrate_scalar(
                |_, y| -y,
                0.0,
                10.0,
                1.0,
                &decay_cfg(tol),
                &[],
                Output::Steps,
            )
            .unwrap();
            let err = (sol.y_end[0] - (-10.0f64).exp()).abs();
            log_n.push((sol.stats.accepted as f64).ln());
            log_err.push(err.ln());
        }
        let fit = crate::numerics::fit_line(&log_n, &log_err).unwrap();
        let order = -fit.slope;
        assert!((order - 5.0).abs() <= 0.5, "observed order {order}");
    }

    #[test]
    fn nonfinite_start_is_rejected() {
        let err = integrate_scalar(
            |t, _| 1.0 / t,
            0.0,
            1.0,
            0.0,
            &IntegratorConfig::default(),
            &[],
            Output::Steps,
        )
        .unwrap_err();
        assert!(matches!(err, IntegrationError::NonFiniteStart { .. }));
    }

    #[test]
    fn singularity_inside_interval_underflows() {
        // y' = 1/(1-t)^2 blows up at t = 1
        let err = integrate_scalar(
            |t, _| 1.0 / ((1.0 - t) * (1.0 - t)),
            0.0,
            2.0,
            0.0,
            &IntegratorConfig::default(),
            &[],
            Output::Steps,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            IntegrationError::StepSizeUnderflow { .. } | IntegrationError::MaxStepsExceeded { .. }
        ));
        assert!(err.last_t().unwrap() < 1.0);
    }

    #[test]
    fn step_budget_is_enforced() {
        let cfg = IntegratorConfig {
            max_steps: 5,
            ..Default::default()
        };
        let err = integrate_scalar(
            |t, _| (50.0 * t).sin(),
            0.0,
            10.0,
            0.0,
            &cfg,
            &[],
            Output::Steps,
        )
        .unwrap_err();
        assert!(matches!(err, IntegrationError::MaxStepsExceeded { .. }));
    }

    #[test]
    fn bad_interval() {
        let err = integrate_scalar(
            |_, y| y,
            1.0,
            1.0,
            0.0,
            &IntegratorConfig::default(),
            &[],
            Output::Steps,
        )
        .unwrap_err();
        assert!(matches!(err, IntegrationError::InvalidInterval { .. }));
    }
}
