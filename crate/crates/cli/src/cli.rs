use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use degenwave_core::bounds::DEFAULT_BOUNDS_TOL;
use degenwave_core::shooting::{DEFAULT_DELTA, DEFAULT_EPS};

#[derive(Debug, Parser)]
#[command(
    name = "degenwave",
    version,
    about = "Traveling wavefronts of doubly degenerate reaction-diffusion systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON model config; defaults to g(s) = s, h(r) = r, f(s, r) = s·r
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Directory for result files and the run manifest
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Directory memoizing shots across runs
    #[arg(long, global = true, value_name = "DIR")]
    pub cache: Option<PathBuf>,
    /// Bracket width of the threshold search [default: 1e-3, 1e-6 for profile and report]
    #[arg(long, global = true)]
    pub tol_c: Option<f64>,
    /// Launch offset from η = 0
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Stop offset from η = 1
    #[arg(long, global = true, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Print JSON on stdout (default for every command except sweep)
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Print the command's table as CSV on stdout
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bound c♯ (both branches) and upper bound c* on the threshold speed
    Bounds {
        #[arg(long, default_value_t = DEFAULT_BOUNDS_TOL)]
        tol: f64,
    },
    /// Integrate one trajectory and decide admissibility
    Shoot {
        #[arg(long)]
        speed: f64,
    },
    /// Locate the threshold speed by bisection
    Speed,
    /// Reconstruct the wave profile at a speed, or at the threshold
    Profile {
        #[arg(long, required_unless_present = "threshold")]
        speed: Option<f64>,
        /// Use the threshold speed found by bisection
        #[arg(long, conflicts_with = "speed")]
        threshold: bool,
        /// η at ξ = 0
        #[arg(long, default_value_t = 0.5)]
        anchor: f64,
        /// Write the two-panel figure to this path
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Append this much rest state beyond a finite front edge
        #[arg(long, value_name = "LENGTH")]
        rest: Option<f64>,
    },
    /// Simulate the time-dependent system and fit the front speed
    Pde(PdeArgs),
    /// Bounds (and optionally threshold speeds) over a grid of exponents α
    Sweep {
        /// Comma-separated exponents of g(s) = s^α
        #[arg(long, default_value = "0.5,1,1.5,1.9,2,2.1,2.5,3,4")]
        alpha: String,
        /// Exponent of h(r) = r^γ [default: the model's]
        #[arg(long)]
        gamma: Option<f64>,
        /// Also search the threshold speed where the model allows shooting
        #[arg(long)]
        speeds: bool,
        #[arg(long, default_value_t = DEFAULT_BOUNDS_TOL)]
        tol: f64,
    },
    /// Bounds, threshold, profiles at c0 and c0 + 0.5, optional PDE cross-check
    Report {
        #[arg(long)]
        pde: bool,
        #[arg(long, default_value_t = DEFAULT_BOUNDS_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaceArg {
    Arithmetic,
    Upwind,
}

#[derive(Debug, Clone, Args)]
pub struct PdeArgs {
    #[arg(long, default_value_t = 4000)]
    pub cells: usize,
    #[arg(long, default_value_t = 400.0)]
    pub length: f64,
    #[arg(long, default_value_t = 300.0)]
    pub time: f64,
    #[arg(long, default_value_t = 0.4)]
    pub cfl: f64,
    /// Position of the initial step
    #[arg(long, default_value_t = 20.0)]
    pub x0: f64,
    /// tanh width of the initial step (0 for a jump)
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Time between recorded front positions
    #[arg(long, default_value_t = 1.0)]
    pub sample_dt: f64,
    #[arg(long, value_enum, default_value_t = FaceArg::Arithmetic)]
    pub face: FaceArg,
    /// Switch the reaction terms off
    #[arg(long)]
    pub no_reaction: bool,
}
