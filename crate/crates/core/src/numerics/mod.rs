//! Shared numerical kernels: ODE integration, quadrature, bracketed search and fitting.

pub mod bisect;
pub mod fit;
pub mod ode;
pub mod quad;

pub use bisect::{bisect_monotone, golden_section_max, try_bisect_monotone, Bracket, BracketError};
pub use fit::{fit_line, fit_power_law, LineFit};
pub use ode::{
    integrate_ivp, integrate_scalar, Crossing, EventRecord, EventSpec, IntegrationError,
    IntegratorConfig, Output, Solution, StepStats,
};
pub use quad::{quad_adaptive, QuadError, QuadResult, SingularEnds};
