//! Traveling wavefronts for the degenerate reaction-diffusion system
//!
//! ```text
//! n_t = −f(n, b)
//! b_t = (g(n) h(b) b_x)_x + f(n, b)
//! ```
//!
//! Speed bounds, shooting for the minimal admissible speed, profile
//! reconstruction with front-edge classification, and a PDE cross-check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod error;
pub mod model;
pub mod numerics;
pub mod pdesim;
pub mod profile;
pub mod shooting;

pub use bounds::{compute_bounds, compute_c_sharp, compute_c_star, DominantBranch, SpeedBounds};
pub use error::{Error, Result};
pub use model::{
    audit_assumptions, build_power_law, build_power_law_bounds_only, estimate_constants,
    AssumptionReport, ModelConfig, ModelConstants, ModelSpec, ReactionKind,
};
pub use pdesim::{measure_speed, run_pde, FaceDiffusivity, InitialData, PdeConfig, PdeRun};
pub use profile::{
    check_first_integral, front_edge, reconstruct, FrontEdge, FrontEdgeReport, ResidualReport,
    WaveProfile,
};
pub use shooting::{
    classify_regime, classify_threshold, decide, find_threshold, is_admissible, shoot, RegimeClass,
    RegimeReport, ShootConfig, ShotResult, SpeedReport,
};
