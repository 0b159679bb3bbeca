//! One line per acceptance criterion. Criteria 11 and 12 are informational and
//! never fail the run.

use std::process::ExitCode;
use std::time::Instant;

use degenwave_core::bounds::{
    closed_form_power_law, compute_bounds, compute_c_sharp, DominantBranch, DEFAULT_BOUNDS_TOL,
};
use degenwave_core::model::{build_power_law_bounds_only, ModelSpec, ReactionKind};
use degenwave_core::pdesim::{measure_speed, run_pde, PdeConfig};
use degenwave_core::profile::{
    check_first_integral, front_edge, reconstruct, xi_integral, FrontEdge, WaveProfile,
};
use degenwave_core::shooting::{
    classify_regime, classify_threshold, find_threshold, is_admissible, measure_launch_coefficient,
    shoot, threshold_profile_delta, RegimeClass, ShootConfig, SpeedReport,
};

type Outcome = Result<String, String>;

struct Runner {
    failed_blocking: usize,
}

impl Runner {
    fn check(&mut self, id: u32, name: &str, blocking: bool, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match (&r, blocking) {
            (Ok(d), _) => ("PASS", d.as_str()),
            (Err(d), true) => ("FAIL", d.as_str()),
            (Err(d), false) => ("WARN", d.as_str()),
        };
        if r.is_err() && blocking {
            self.failed_blocking += 1;
        }
        println!("{tag} {id:>2} {name}: {detail} [{secs:.2} s]");
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn barrier_gap(p: &WaveProfile) -> f64 {
    p.eta
        .iter()
        .zip(&p.beta)
        .map(|(e, b)| e + b - 1.0)
        .fold(f64::INFINITY, f64::min)
}

fn main() -> ExitCode {
    let mut run = Runner { failed_blocking: 0 };
    let smga = ModelSpec::smga();
    let cfg = ShootConfig::default();

    run.check(1, "bounds oracle", true, || {
        let t = Instant::now();
        let mut worst = 0.0f64;
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let m = build_power_law_bounds_only(alpha, 1.0, ReactionKind::Product)
                .map_err(|e| e.to_string())?;
            let c = compute_c_sharp(&m, DEFAULT_BOUNDS_TOL).map_err(|e| e.to_string())?;
            let (b1, b2) = closed_form_power_law(alpha, 1.0, 1.0).map_err(|e| e.to_string())?;
            worst = worst.max(rel(c.branch1, b1)).max(rel(c.branch2, b2));
        }
        let secs = t.elapsed().as_secs_f64();
        ensure(
            worst <= 1e-8 && secs < 1.0,
            format!("max relative error {worst:.2e} (<= 1e-8), {secs:.3} s (< 1 s)"),
        )
    });

    run.check(2, "SMGA bound constants", true, || {
        let b = compute_bounds(&smga, DEFAULT_BOUNDS_TOL).map_err(|e| e.to_string())?;
        let e1 = (b.c_sharp - (1.0f64 / 12.0).sqrt()).abs();
        let e2 = (b.c_star - 2.0).abs();
        ensure(
            e1 <= 1e-6 && e2 <= 1e-6,
            format!(
                "c_sharp {:.9} (err {e1:.1e}), c_star {:.9} (err {e2:.1e})",
                b.c_sharp, b.c_star
            ),
        )
    });

    run.check(3, "branch crossover", true, || {
        let dom = |alpha: f64| -> Result<_, String> {
            let m = build_power_law_bounds_only(alpha, 1.0, ReactionKind::Product)
                .map_err(|e| e.to_string())?;
            compute_c_sharp(&m, DEFAULT_BOUNDS_TOL).map_err(|e| e.to_string())
        };
        let (a, b, c) = (dom(1.9)?, dom(2.0)?, dom(2.1)?);
        let agree = rel(b.branch1, b.branch2);
        ensure(
            a.dominant() == DominantBranch::Branch1
                && c.dominant() == DominantBranch::Branch2
                && agree <= 1e-6,
            format!(
                "alpha 1.9 -> {}, alpha 2.1 -> {}, alpha 2 branches differ by {agree:.1e}",
                a.dominant().label(),
                c.dominant().label()
            ),
        )
    });

    run.check(4, "launch series", true, || {
        let mut worst = 0.0f64;
        for c in [0.5, 1.0, 2.0] {
            let k = measure_launch_coefficient(&smga, c, 1e-5, &cfg.integrator)
                .map_err(|e| e.to_string())?;
            worst = worst.max(rel(k, 1.0 / (c * c)));
        }
        ensure(
            worst <= 0.01,
            format!("max relative deviation from 1/c^2: {worst:.2e} (<= 1e-2)"),
        )
    });

    run.check(5, "admissibility endpoints", true, || {
        let low = shoot(&smga, 0.2, &cfg).map_err(|e| e.to_string())?;
        let low_adm = is_admissible(&low).map_err(|e| e.to_string())?;
        let high = shoot(&smga, 2.5, &cfg).map_err(|e| e.to_string())?;
        let reg = classify_regime(&smga, &high).map_err(|e| e.to_string())?;
        let p = reg.exponent.unwrap_or(f64::NAN);
        ensure(
            !low_adm && reg.regime == RegimeClass::Classical && (0.85..=1.15).contains(&p),
            format!(
                "c=0.2 admissible={low_adm} (B_end {:.3}); c=2.5 {:?} with p={p:.4}",
                low.b_end, reg.regime
            ),
        )
    });

    let mut report: Option<SpeedReport> = None;
    run.check(6, "threshold search", true, || {
        let t = Instant::now();
        let r = find_threshold(&smga, 1e-6, &cfg).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        let ok = r.bracket_width <= 1e-3
            && r.c_lo >= 0.2887
            && r.c_hi <= 2.0
            && r.monotone
            && secs < 30.0;
        let detail = format!(
            "c0 = {:.7} in [{:.7}, {:.7}], width {:.1e}, {} shots monotone={}, {secs:.1} s",
            r.c0,
            r.c_lo,
            r.c_hi,
            r.bracket_width,
            r.samples.len(),
            r.monotone
        );
        report = Some(r);
        ensure(ok, detail)
    });

    let Some(report) = report else {
        println!("FAIL 7-10 skipped: no threshold bracket");
        return ExitCode::FAILURE;
    };
    let c0 = report.c0;

    run.check(7, "sharp tail at threshold", true, || {
        let (reg, shot) = classify_threshold(&smga, &report, &cfg).map_err(|e| e.to_string())?;
        let p = reg.exponent.unwrap_or(f64::NAN);
        let ratio = reg.amplitude_ratio.unwrap_or(f64::NAN);
        ensure(
            (0.35..=0.65).contains(&p) && (ratio - 1.0).abs() <= 0.25,
            format!(
                "p = {p:.4}, A/(c0*sqrt2) = {ratio:.4} at delta {:.0e}",
                shot.delta
            ),
        )
    });

    run.check(8, "monotonicity in c", true, || {
        let shots: Vec<_> = [0.4, 0.8, 1.2]
            .iter()
            .map(|&c| shoot(&smga, c, &cfg))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mut worst = f64::NEG_INFINITY;
        for w in shots.windows(2) {
            for (e, b) in w[1].eta.iter().zip(&w[1].b) {
                if let Some(lo) = w[0].b_at(*e) {
                    worst = worst.max(b - lo);
                }
            }
        }
        ensure(
            worst <= 1e-8,
            format!("max B_c2 - B_c1 over shared eta: {worst:.2e} (<= 1e-8)"),
        )
    });

    let sharp_shot = shoot(
        &smga,
        c0,
        &cfg.with_delta(threshold_profile_delta(cfg.delta)),
    );
    let classical_shot = shoot(&smga, c0 + 0.5, &cfg);

    run.check(9, "profile audit", true, || {
        let s = sharp_shot.as_ref().map_err(|e| e.to_string())?;
        let k = classical_shot.as_ref().map_err(|e| e.to_string())?;
        let sharp = reconstruct(&smga, s, 0.5).map_err(|e| e.to_string())?;
        let classical = reconstruct(&smga, k, 0.5).map_err(|e| e.to_string())?;
        let r1 = check_first_integral(&smga, &sharp);
        let r2 = check_first_integral(&smga, &classical);
        let gap = barrier_gap(&sharp).min(barrier_gap(&classical));
        let slope = (sharp.edge_slope_ratio - 1.0).abs();
        ensure(
            r1.passed && r2.passed && gap >= -1e-8 && slope <= 0.05,
            format!(
                "residuals {:.1e} / {:.1e}, min eta+beta-1 {gap:.1e}, \
                 edge slope / (-c0) = {:.4}",
                r1.sup, r2.sup, sharp.edge_slope_ratio
            ),
        )
    });

    run.check(10, "front-edge dichotomy", true, || {
        let s = sharp_shot.as_ref().map_err(|e| e.to_string())?;
        let k = classical_shot.as_ref().map_err(|e| e.to_string())?;
        let fin = front_edge(&smga, s, 0.5, &cfg).map_err(|e| e.to_string())?;
        let inf = front_edge(&smga, k, 0.5, &cfg).map_err(|e| e.to_string())?;
        // ξ(1 − δ) over two decades of δ
        let coarse = shoot(&smga, c0 + 0.5, &cfg.with_delta(1e-4)).map_err(|e| e.to_string())?;
        let x4 = xi_integral(&smga, &coarse, 0.5, coarse.eta_end).map_err(|e| e.to_string())?;
        let x6 = xi_integral(&smga, k, 0.5, k.eta_end).map_err(|e| e.to_string())?;
        let decade = inf.increments[0].1;
        let growth = (x6 - x4) / (2.0 * decade);
        let finite = matches!(fin.edge, FrontEdge::Finite { .. });
        ensure(
            finite && inf.edge == FrontEdge::Infinite && (growth - 1.0).abs() <= 0.1,
            format!(
                "c0: {:?} after {} refinements (last increment {:.1e}); \
                 c0+0.5: {:?}, xi(1-1e-6) - xi(1-1e-4) = {:.3} = {growth:.3} x two decades",
                fin.edge,
                fin.refinements,
                fin.increments.last().map_or(f64::NAN, |v| v.1),
                inf.edge,
                x6 - x4
            ),
        )
    });

    run.check(11, "threshold vs sqrt(1/2) (informational)", false, || {
        let guess = 0.5f64.sqrt();
        Ok(format!(
            "|c0 - sqrt(1/2)| / sqrt(1/2) = {:.4e}",
            (c0 - guess).abs() / guess
        ))
    });

    run.check(12, "PDE cross-check (exploratory)", false, || {
        let b = compute_bounds(&smga, DEFAULT_BOUNDS_TOL).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let base = run_pde(&smga, &PdeConfig::default()).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        let (v, se) = measure_speed(&base).map_err(|e| e.to_string())?;
        let fine = run_pde(
            &smga,
            &PdeConfig {
                cells: 8000,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let (v2, _) = measure_speed(&fine).map_err(|e| e.to_string())?;
        let off = run_pde(
            &smga,
            &PdeConfig {
                reaction: false,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let cons = (off.b_mass_final - off.b_mass_initial).abs() / off.config.t_end;
        let inside = v >= b.c_sharp - 0.05 && v <= b.c_star + 0.05;
        let gap = rel(v, c0);
        let refine = rel(v2, v);
        ensure(
            inside
                && gap <= 0.15
                && refine < 0.02
                && cons <= 1e-8
                && base.max_clip <= 1e-9
                && secs < 300.0,
            format!(
                "speed {v:.5} +- {se:.1e}, |v-c0|/c0 = {gap:.2e}, N->2N change {refine:.2e}, \
                 reaction-off drift {cons:.1e}/time, max clip {:.1e}, default run {secs:.1} s",
                base.max_clip
            ),
        )
    });

    if run.failed_blocking > 0 {
        println!("{} blocking criteria failed", run.failed_blocking);
        ExitCode::FAILURE
    } else {
        println!("all blocking criteria passed");
        ExitCode::SUCCESS
    }
}
