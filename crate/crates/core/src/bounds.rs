//! Lower (`c_sharp`) and upper (`c_star`) bounds for the threshold wave speed.
//!
//! ```text
//! branch1 = √(L1·Mg·∫₀¹ g(1−r) h(r) r dr)
//! branch2 = √(2·L1·Mg·∫₀¹ (1−r) g(1−r) h(r) r dr)
//! c_sharp = max(branch1, branch2)
//! c_star  = 2·√(L2 · max g · sup h(r)/r)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{audit_assumptions, ModelError, ModelSpec};
use crate::numerics::{golden_section_max, quad_adaptive, QuadError, SingularEnds};

pub const DEFAULT_BOUNDS_TOL: f64 = 1e-10;
/// Relative gap below which the two lower-bound branches count as equal.
pub const TIE_RTOL: f64 = 1e-8;
const SAMPLES: usize = 4096;
const RATIO_CAP: f64 = 1e12;
const AUDIT_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("h(r)/r is unbounded near r = {r:e} (ratio {ratio:e})")]
    UnboundedRatio { r: f64, ratio: f64 },
    #[error("closed forms exist only for gamma = 1 (got {gamma})")]
    UnsupportedGamma { gamma: f64 },
    #[error("tolerance must be positive (got {0})")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantBranch {
    Branch1,
    Branch2,
    Tie,
}

impl DominantBranch {
    pub fn classify(branch1: f64, branch2: f64) -> Self {
        let scale = branch1.abs().max(branch2.abs());
        if (branch1 - branch2).abs() <= TIE_RTOL * scale {
            DominantBranch::Tie
        } else if branch1 > branch2 {
            DominantBranch::Branch1
        } else {
            DominantBranch::Branch2
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DominantBranch::Branch1 => "1",
            DominantBranch::Branch2 => "2",
            DominantBranch::Tie => "tie",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CSharp {
    pub branch1: f64,
    pub branch2: f64,
    pub c_sharp: f64,
    /// Propagated quadrature error bars on each branch.
    pub branch1_error: f64,
    pub branch2_error: f64,
}

impl CSharp {
    pub fn dominant(&self) -> DominantBranch {
        DominantBranch::classify(self.branch1, self.branch2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBounds {
    pub c_sharp_branch1: f64,
    pub c_sharp_branch2: f64,
    pub c_sharp: f64,
    pub c_star: f64,
    pub branch1_error: f64,
    pub branch2_error: f64,
    pub dominant_branch: DominantBranch,
}

fn audited(m: &ModelSpec) -> Result<(), BoundsError> {
    audit_assumptions(m, AUDIT_GRID).into_result()?;
    Ok(())
}

fn branch(weight: f64, integral: f64, err: f64) -> (f64, f64) {
    let v = (weight * integral).max(0.0).sqrt();
    let e = if v > 0.0 {
        weight * err / (2.0 * v)
    } else {
        (weight * err).sqrt()
    };
    (v, e)
}

/// Both lower-bound branches by adaptive quadrature; the model is audited first.
pub fn compute_c_sharp(m: &ModelSpec, tol: f64) -> Result<CSharp, BoundsError> {
    if !(tol > 0.0) {
        return Err(BoundsError::InvalidTolerance(tol));
    }
    audited(m)?;
    let c = m.constants();
    let i1 = quad_adaptive(
        |r| m.g(1.0 - r) * m.h(r) * r,
        0.0,
        1.0,
        tol,
        SingularEnds::Both,
    )?;
    let i2 = quad_adaptive(
        |r| (1.0 - r) * m.g(1.0 - r) * m.h(r) * r,
        0.0,
        1.0,
        tol,
        SingularEnds::Both,
    )?;
    let (b1, e1) = branch(c.l1 * c.mg, i1.value, i1.error_estimate);
    let (b2, e2) = branch(2.0 * c.l1 * c.mg, i2.value, i2.error_estimate);
    Ok(CSharp {
        branch1: b1,
        branch2: b2,
        c_sharp: b1.max(b2),
        branch1_error: e1,
        branch2_error: e2,
    })
}

fn max_g(m: &ModelSpec, tol: f64) -> f64 {
    let n = SAMPLES;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..=n {
        let v = m.g(i as f64 / n as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = best_i.saturating_sub(1) as f64 / n as f64;
    let hi = (best_i + 1).min(n) as f64 / n as f64;
    let (_, polished) = golden_section_max(|s| m.g(s), lo, hi, tol.max(1e-14));
    best.max(polished)
}

fn sup_h_ratio(m: &ModelSpec, tol: f64) -> Result<f64, BoundsError> {
    let dh0 = m.constants().dh0;
    if dh0.is_infinite() || dh0 > RATIO_CAP {
        return Err(BoundsError::UnboundedRatio { r: 0.0, ratio: dh0 });
    }
    let ratio = |r: f64| m.h(r) / r;
    let mut cand: Vec<f64> = (1..=SAMPLES).map(|i| i as f64 / SAMPLES as f64).collect();
    // geometric points toward 0, where the supremum may only be approached
    cand.extend((13..=100).map(|k| 0.5f64.powi(k)));
    let (mut best_r, mut best) = (f64::NAN, f64::NEG_INFINITY);
    for &r in &cand {
        let q = ratio(r);
        if q.is_nan() || q > RATIO_CAP {
            return Err(BoundsError::UnboundedRatio { r, ratio: q });
        }
        if q > best {
            best = q;
            best_r = r;
        }
    }
    let step = 1.0 / SAMPLES as f64;
    if best_r >= step {
        let lo = (best_r - step).max(step * 0.5);
        let hi = (best_r + step).min(1.0);
        let (_, polished) = golden_section_max(ratio, lo, hi, tol.max(1e-14));
        best = best.max(polished);
    }
    if dh0.is_finite() {
        best = best.max(dh0);
    }
    Ok(best)
}

/// Upper bound `2·√(L2 · max g · sup h(r)/r)`; the model is audited first.
pub fn compute_c_star(m: &ModelSpec, tol: f64) -> Result<f64, BoundsError> {
    if !(tol > 0.0) {
        return Err(BoundsError::InvalidTolerance(tol));
    }
    audited(m)?;
    let gmax = max_g(m, tol);
    let hsup = sup_h_ratio(m, tol)?;
    Ok(2.0 * (m.constants().l2 * gmax * hsup).sqrt())
}

pub fn compute_bounds(m: &ModelSpec, tol: f64) -> Result<SpeedBounds, BoundsError> {
    let cs = compute_c_sharp(m, tol)?;
    let c_star = compute_c_star(m, tol)?;
    Ok(SpeedBounds {
        c_sharp_branch1: cs.branch1,
        c_sharp_branch2: cs.branch2,
        c_sharp: cs.c_sharp,
        c_star,
        branch1_error: cs.branch1_error,
        branch2_error: cs.branch2_error,
        dominant_branch: cs.dominant(),
    })
}

/// Closed forms of both branches for `g(s) = s^alpha`, `h(r) = r`.
pub fn closed_form_power_law(alpha: f64, gamma: f64, l1: f64) -> Result<(f64, f64), BoundsError> {
    if gamma != 1.0 {
        return Err(BoundsError::UnsupportedGamma { gamma });
    }
    let a = alpha;
    let b1 = (2.0 * l1 / ((a + 1.0) * (a + 2.0) * (a + 3.0))).sqrt();
    let b2 = (4.0 * l1 / ((a + 2.0) * (a + 3.0) * (a + 4.0))).sqrt();
    Ok((b1, b2))
}
