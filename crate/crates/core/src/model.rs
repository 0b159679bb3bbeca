//! Problem instances `(f, g, h)` with their structural constants, plus a
//! sampling audit of the standing assumptions.
//!
//! The reaction `f(s, r)` must vanish exactly on the axes and be sandwiched
//! as `L1·s·r ≤ f ≤ L2·s·r`; the diffusivity factors `g`, `h` vanish only at 0.
//! Corner derivatives are stored alongside the evaluators because the
//! shooting launch and the sharp-front amplitude depend on them directly.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ReactionFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type DiffusionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Largest violation tolerated by [`audit_assumptions`].
pub const AUDIT_TOL: f64 = 1e-9;
/// Tolerance for the exact-zero conditions on the axes.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("corner derivative {which} vanishes; shooting needs a positive value")]
    DegenerateCornerDerivative { which: &'static str, value: f64 },
    #[error("corner derivative {which} is unbounded; shooting needs a finite value")]
    UnboundedCornerDerivative { which: &'static str },
    #[error("invalid model parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("estimated constant {name} = {value} is not positive")]
    NonPositiveEstimate { name: &'static str, value: f64 },
    #[error("model fails the assumption audit: {}", failed.join(", "))]
    AuditFailed { failed: Vec<String> },
    #[error("invalid model config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionKind {
    /// `f(s, r) = s·r`
    Product,
    /// `f(s, r) = s·r / (1 + k·s)`
    Monod { k: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    PowerLaw {
        alpha: f64,
        gamma: f64,
        reaction: ReactionKind,
    },
    Custom {
        name: String,
    },
}

/// Structural constants of a model.
///
/// `dg0`, `dh0` may be `0` or `+∞` for models admitted in bounds-only mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub l1: f64,
    pub l2: f64,
    pub mg: f64,
    /// g'(0)
    pub dg0: f64,
    /// h'(0)
    pub dh0: f64,
    /// ∂f/∂s at (0, 1)
    pub dfdn01: f64,
    /// ∂f/∂r at (1, 0)
    pub dfdb10: f64,
}

/// One problem instance. Immutable; clones share the evaluators.
#[derive(Clone)]
pub struct ModelSpec {
    reaction: ReactionFn,
    diff_g: DiffusionFn,
    diff_h: DiffusionFn,
    constants: ModelConstants,
    family: Family,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("family", &self.family)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    /// Builds a model from user-supplied evaluators and constants.
    ///
    /// Only NaN constants are rejected here; everything else is the audit's job.
    pub fn custom<F, G, H>(
        name: impl Into<String>,
        f: F,
        g: G,
        h: H,
        constants: ModelConstants,
    ) -> Result<Self, ModelError>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let c = constants;
        for (name, value) in [
            ("l1", c.l1),
            ("l2", c.l2),
            ("mg", c.mg),
            ("dg0", c.dg0),
            ("dh0", c.dh0),
            ("dfdn01", c.dfdn01),
            ("dfdb10", c.dfdb10),
        ] {
            if value.is_nan() {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(Self {
            reaction: Arc::new(f),
            diff_g: Arc::new(g),
            diff_h: Arc::new(h),
            constants,
            family: Family::Custom { name: name.into() },
        })
    }

    /// The reference case `g(s) = s`, `h(r) = r`, `f(s, r) = s·r`.
    pub fn smga() -> Self {
        build_power_law(1.0, 1.0, ReactionKind::Product).expect("reference model is valid")
    }

    #[inline]
    pub fn f(&self, s: f64, r: f64) -> f64 {
        (self.reaction)(s, r)
    }

    #[inline]
    pub fn g(&self, s: f64) -> f64 {
        (self.diff_g)(s)
    }

    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        (self.diff_h)(r)
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Same evaluators with replaced constants.
    pub fn with_constants(&self, constants: ModelConstants) -> Self {
        Self {
            constants,
            ..self.clone()
        }
    }

    /// Same model with the reaction scaled by `lambda`; `L1`, `L2` and the
    /// reaction corner slopes scale with it.
    pub fn scale_reaction(&self, lambda: f64) -> Self {
        let f = self.reaction.clone();
        let c = self.constants;
        Self {
            reaction: Arc::new(move |s, r| lambda * f(s, r)),
            constants: ModelConstants {
                l1: lambda * c.l1,
                l2: lambda * c.l2,
                dfdn01: lambda * c.dfdn01,
                dfdb10: lambda * c.dfdb10,
                ..c
            },
            ..self.clone()
        }
    }

    /// Same model with `h` scaled by `lambda`.
    pub fn scale_h(&self, lambda: f64) -> Self {
        let h = self.diff_h.clone();
        Self {
            diff_h: Arc::new(move |r| lambda * h(r)),
            constants: ModelConstants {
                dh0: lambda * self.constants.dh0,
                ..self.constants
            },
            ..self.clone()
        }
    }

    /// Checks the corner data needed by the shooting launch and the tail amplitude.
    pub fn check_shootable(&self) -> Result<(), ModelError> {
        let c = &self.constants;
        for (which, value) in [
            ("dg0", c.dg0),
            ("dh0", c.dh0),
            ("dfdn01", c.dfdn01),
            ("dfdb10", c.dfdb10),
        ] {
            if value.is_infinite() {
                return Err(ModelError::UnboundedCornerDerivative { which });
            }
            if !(value > 0.0) {
                return Err(ModelError::DegenerateCornerDerivative { which, value });
            }
        }
        for (name, value) in [("g(1)", self.g(1.0)), ("h(1)", self.h(1.0))] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// `h(1)·g'(0)·∂f/∂s(0,1)`: second-order launch coefficient times `c²`.
    pub fn launch_coefficient(&self) -> f64 {
        self.h(1.0) * self.constants.dg0 * self.constants.dfdn01
    }

    /// Amplitude `C` of the sharp tail `B ≈ C·√(1−η)` at speed `c`.
    pub fn sharp_amplitude(&self, c: f64) -> f64 {
        c * (2.0 / (self.g(1.0) * self.constants.dh0 * self.constants.dfdb10)).sqrt()
    }

    /// Left slope `−c/(g(1)·h'(0))` of a sharp profile at its edge.
    pub fn sharp_edge_slope(&self, c: f64) -> f64 {
        -c / (self.g(1.0) * self.constants.dh0)
    }

    /// Canonical text identifying the model, used for hashing and caching.
    pub fn fingerprint(&self) -> String {
        let fam = serde_json::to_string(&self.family).unwrap_or_default();
        let con = serde_json::to_string(&self.constants).unwrap_or_default();
        format!("{fam}|{con}")
    }
}

fn check_exponent(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value })
    }
}

fn power_fn(p: f64) -> DiffusionFn {
    if p == 1.0 {
        Arc::new(|x| x)
    } else {
        Arc::new(move |x: f64| x.powf(p))
    }
}

fn corner_slope(p: f64) -> f64 {
    match p.partial_cmp(&1.0) {
        Some(std::cmp::Ordering::Equal) => 1.0,
        Some(std::cmp::Ordering::Greater) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Power-law family with no restriction on the corner slopes.
///
/// Bound computations accept the result; shooting rejects it through
/// [`ModelSpec::check_shootable`] unless `alpha = gamma = 1`.
pub fn build_power_law_bounds_only(
    alpha: f64,
    gamma: f64,
    reaction: ReactionKind,
) -> Result<ModelSpec, ModelError> {
    check_exponent("alpha", alpha)?;
    check_exponent("gamma", gamma)?;
    let (f, l1, dfdb10): (ReactionFn, f64, f64) = match reaction {
        ReactionKind::Product => (Arc::new(|s, r| s * r), 1.0, 1.0),
        ReactionKind::Monod { k } => {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name: "k",
                    value: k,
                });
            }
            let kp1 = 1.0 + k;
            (
                Arc::new(move |s, r| s * r / (1.0 + k * s)),
                1.0 / kp1,
                1.0 / kp1,
            )
        }
    };
    Ok(ModelSpec {
        reaction: f,
        diff_g: power_fn(alpha),
        diff_h: power_fn(gamma),
        constants: ModelConstants {
            l1,
            l2: 1.0,
            mg: 1.0,
            dg0: corner_slope(alpha),
            dh0: corner_slope(gamma),
            dfdn01: 1.0,
            dfdb10,
        },
        family: Family::PowerLaw {
            alpha,
            gamma,
            reaction,
        },
    })
}

/// `g(s) = s^alpha`, `h(r) = r^gamma` with a product or Monod reaction.
///
/// Only exponents equal to 1 give finite positive corner slopes; other values
/// are reported as errors here (use [`build_power_law_bounds_only`] for bounds).
pub fn build_power_law(
    alpha: f64,
    gamma: f64,
    reaction: ReactionKind,
) -> Result<ModelSpec, ModelError> {
    let m = build_power_law_bounds_only(alpha, gamma, reaction)?;
    for (which, p) in [("dg0", alpha), ("dh0", gamma)] {
        if p > 1.0 {
            return Err(ModelError::DegenerateCornerDerivative { which, value: 0.0 });
        }
        if p < 1.0 {
            return Err(ModelError::UnboundedCornerDerivative { which });
        }
    }
    Ok(m)
}

/// JSON model description accepted by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    PowerLaw {
        alpha: f64,
        gamma: f64,
        reaction: ReactionKind,
    },
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Config(e.to_string()))
    }

    /// Builds the model in bounds-only mode; shooting checks the corners itself.
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        match *self {
            ModelConfig::PowerLaw {
                alpha,
                gamma,
                reaction,
            } => build_power_law_bounds_only(alpha, gamma, reaction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// f(s,0) = f(0,r) = 0
    ReactionVanishesOnAxes,
    /// g(0) = h(0) = 0
    DiffusionVanishesAtZero,
    /// g, h > 0 on (0,1]
    DiffusionPositive,
    /// L1·s·r ≤ f
    LowerSandwich,
    /// f ≤ L2·s·r
    UpperSandwich,
    /// g(s) ≥ Mg·g(s1) for s ≥ s1
    GComparison,
    /// ∂f/∂s(0,1) ≥ L1
    CornerSlopeEta,
    /// ∂f/∂r(1,0) ≥ L1
    CornerSlopeBeta,
    /// 0 < L1 ≤ L2, 0 < Mg ≤ 1
    ConstantsOrdered,
}

impl Assumption {
    pub const ALL: [Assumption; 9] = [
        Assumption::ReactionVanishesOnAxes,
        Assumption::DiffusionVanishesAtZero,
        Assumption::DiffusionPositive,
        Assumption::LowerSandwich,
        Assumption::UpperSandwich,
        Assumption::GComparison,
        Assumption::CornerSlopeEta,
        Assumption::CornerSlopeBeta,
        Assumption::ConstantsOrdered,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// Non-negative; `+∞` when an evaluator returned a non-finite value.
    pub worst_violation: f64,
    /// `(s, r)` (or `(s, s1)` for the comparison check) of the worst sample.
    pub location: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub grid_n: usize,
    pub checks: Vec<AssumptionCheck>,
    pub passed: bool,
    /// Whether the corner slopes allow shooting (not part of `passed`).
    pub shootable: bool,
}

impl AssumptionReport {
    pub fn check(&self, a: Assumption) -> &AssumptionCheck {
        self.checks
            .iter()
            .find(|c| c.assumption == a)
            .expect("every assumption is audited")
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{:?}", c.assumption))
            .collect()
    }

    pub fn into_result(self) -> Result<Self, ModelError> {
        if self.passed {
            Ok(self)
        } else {
            Err(ModelError::AuditFailed {
                failed: self.failed(),
            })
        }
    }
}

struct Worst {
    v: f64,
    at: Option<(f64, f64)>,
}

impl Worst {
    fn new() -> Self {
        Self { v: 0.0, at: None }
    }

    fn push(&mut self, violation: f64, at: (f64, f64)) {
        let v = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation.max(0.0)
        };
        if v > self.v {
            self.v = v;
            self.at = Some(at);
        }
    }

    fn finish(self, a: Assumption, extra_ok: bool) -> AssumptionCheck {
        AssumptionCheck {
            assumption: a,
            passed: extra_ok && self.v <= AUDIT_TOL,
            worst_violation: self.v,
            location: self.at,
        }
    }
}

/// Samples every assumption on a `grid_n × grid_n` lattice of `[0,1]²`.
///
/// # Panics
/// If `grid_n < 16`.
pub fn audit_assumptions(m: &ModelSpec, grid_n: usize) -> AssumptionReport {
    assert!(
        grid_n >= 16,
        "audit grid must have at least 16 points per side"
    );
    let pts: Vec<f64> = (0..grid_n)
        .map(|i| i as f64 / (grid_n - 1) as f64)
        .collect();
    let c = m.constants();
    let mut checks = Vec::with_capacity(Assumption::ALL.len());

    let mut w = Worst::new();
    for &x in &pts {
        w.push(m.f(x, 0.0).abs() - ZERO_TOL, (x, 0.0));
        w.push(m.f(0.0, x).abs() - ZERO_TOL, (0.0, x));
    }
    checks.push(w.finish(Assumption::ReactionVanishesOnAxes, true));

    let mut w = Worst::new();
    w.push(m.g(0.0).abs() - ZERO_TOL, (0.0, 0.0));
    w.push(m.h(0.0).abs() - ZERO_TOL, (0.0, 0.0));
    checks.push(w.finish(Assumption::DiffusionVanishesAtZero, true));

    let mut w = Worst::new();
    let mut strict = true;
    for &x in &pts[1..] {
        let (gv, hv) = (m.g(x), m.h(x));
        strict &= gv > 0.0 && hv > 0.0;
        w.push(-gv, (x, 0.0));
        w.push(-hv, (0.0, x));
    }
    checks.push(w.finish(Assumption::DiffusionPositive, strict));

    let mut lo = Worst::new();
    let mut hi = Worst::new();
    for &s in &pts {
        for &r in &pts {
            let fv = m.f(s, r);
            let sr = s * r;
            lo.push(c.l1 * sr - fv, (s, r));
            hi.push(fv - c.l2 * sr, (s, r));
        }
    }
    checks.push(lo.finish(Assumption::LowerSandwich, true));
    checks.push(hi.finish(Assumption::UpperSandwich, true));

    let gv: Vec<f64> = pts.iter().map(|&s| m.g(s)).collect();
    let mut w = Worst::new();
    for (j, &g1) in gv.iter().enumerate() {
        for (i, &g) in gv.iter().enumerate().skip(j) {
            w.push(c.mg * g1 - g, (pts[i], pts[j]));
        }
    }
    checks.push(w.finish(Assumption::GComparison, true));

    let mut w = Worst::new();
    w.push(c.l1 - c.dfdn01, (0.0, 1.0));
    checks.push(w.finish(Assumption::CornerSlopeEta, true));
    let mut w = Worst::new();
    w.push(c.l1 - c.dfdb10, (1.0, 0.0));
    checks.push(w.finish(Assumption::CornerSlopeBeta, true));

    let mut w = Worst::new();
    w.push(c.l1 - c.l2, (c.l1, c.l2));
    w.push(c.mg - 1.0, (c.mg, 1.0));
    w.push(-c.l1, (c.l1, c.l2));
    w.push(-c.mg, (c.mg, 1.0));
    checks.push(w.finish(Assumption::ConstantsOrdered, c.l1 > 0.0 && c.mg > 0.0));

    let passed = checks.iter().all(|c| c.passed);
    AssumptionReport {
        grid_n,
        checks,
        passed,
        shootable: m.check_shootable().is_ok(),
    }
}

/// Grid-based estimates of `(L1, L2, Mg)`, rounded outward by 1%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedConstants {
    pub l1: f64,
    pub l2: f64,
    pub mg: f64,
}

/// Estimates the sandwich and comparison constants of `f` and `g` on the
/// points `i/grid_n`, `i = 1..=grid_n`.
pub fn estimate_constants<F, G>(f: F, g: G, grid_n: usize) -> Result<EstimatedConstants, ModelError>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64) -> f64,
{
    if grid_n < 2 {
        return Err(ModelError::InvalidParameter {
            name: "grid_n",
            value: grid_n as f64,
        });
    }
    let pts: Vec<f64> = (1..=grid_n).map(|i| i as f64 / grid_n as f64).collect();
    let (mut lmin, mut lmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in &pts {
        for &r in &pts {
            let q = f(s, r) / (s * r);
            lmin = lmin.min(q);
            lmax = lmax.max(q);
        }
    }
    // min over s >= s1 of g(s)/g(s1): compare each g(s1) against the suffix minimum
    let gv: Vec<f64> = pts.iter().map(|&s| g(s)).collect();
    let mut suffix_min = f64::INFINITY;
    let mut mg = f64::INFINITY;
    for &g1 in gv.iter().rev() {
        suffix_min = suffix_min.min(g1);
        if g1 > 0.0 {
            mg = mg.min(suffix_min / g1);
        }
    }
    let est = EstimatedConstants {
        l1: lmin * 0.99,
        l2: lmax * 1.01,
        mg: (mg * 0.99).min(1.0),
    };
    for (name, value) in [("l1", est.l1), ("l2", est.l2), ("mg", est.mg)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ModelError::NonPositiveEstimate { name, value });
        }
    }
    Ok(est)
}
