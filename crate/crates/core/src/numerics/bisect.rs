//! Bracketed searches: bisection on a monotone predicate and golden-section maximisation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BracketError {
    #[error(
        "predicate must be false at lo and true at hi \
         (got {pred_lo} at {lo}, {pred_hi} at {hi})"
    )]
    BadBracket {
        lo: f64,
        hi: f64,
        pred_lo: bool,
        pred_hi: bool,
    },
    #[error("invalid bracket [{lo}, {hi}] or tolerance {tol}")]
    InvalidInput { lo: f64, hi: f64, tol: f64 },
}

/// Final bracket plus every predicate evaluation in call order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub evaluations: Vec<(f64, bool)>,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Shrinks `[lo, hi]` until `hi - lo <= tol`, keeping `pred(lo) = false`, `pred(hi) = true`.
pub fn bisect_monotone<P>(mut pred: P, lo: f64, hi: f64, tol: f64) -> Result<Bracket, BracketError>
where
    P: FnMut(f64) -> bool,
{
    try_bisect_monotone::<_, BracketError>(|c| Ok(pred(c)), lo, hi, tol)
}

/// Fallible variant: predicate errors abort the search and are returned as-is.
pub fn try_bisect_monotone<P, E>(mut pred: P, lo: f64, hi: f64, tol: f64) -> Result<Bracket, E>
where
    P: FnMut(f64) -> Result<bool, E>,
    E: From<BracketError>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || !(tol > 0.0) {
        return Err(BracketError::InvalidInput { lo, hi, tol }.into());
    }
    let mut evaluations = Vec::new();
    let pred_lo = pred(lo)?;
    evaluations.push((lo, pred_lo));
    let pred_hi = pred(hi)?;
    evaluations.push((hi, pred_hi));
    if pred_lo || !pred_hi {
        return Err(BracketError::BadBracket {
            lo,
            hi,
            pred_lo,
            pred_hi,
        }
        .into());
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = pred(mid)?;
        evaluations.push((mid, v));
        if v {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Bracket {
        lo,
        hi,
        evaluations,
    })
}

/// Golden-section search for a local maximum of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
