use degenwave_core::model::ModelSpec;
use degenwave_core::pdesim::{measure_speed, run_pde, FaceDiffusivity, InitialData, PdeConfig};

fn config(x0: f64) -> PdeConfig {
    PdeConfig {
        length: 120.0,
        cells: 1200,
        t_end: 80.0,
        initial: InitialData::Step { x0, width: 1.0 },
        ..Default::default()
    }
}

#[test]
fn wider_initial_support_is_not_slower() {
    let m = ModelSpec::smga();
    let (narrow, _) = measure_speed(&run_pde(&m, &config(10.0)).unwrap()).unwrap();
    let (wide, _) = measure_speed(&run_pde(&m, &config(20.0)).unwrap()).unwrap();
    assert!(wide >= narrow - 1e-4, "{wide} < {narrow}");
}

#[test]
fn face_rules_give_nearby_speeds() {
    let m = ModelSpec::smga();
    let a = run_pde(&m, &config(10.0)).unwrap();
    let u = run_pde(
        &m,
        &PdeConfig {
            face: FaceDiffusivity::UpwindWeighted,
            ..config(10.0)
        },
    )
    .unwrap();
    let (va, _) = measure_speed(&a).unwrap();
    let (vu, _) = measure_speed(&u).unwrap();
    assert!((va / vu - 1.0).abs() < 0.05, "{va} vs {vu}");
    for run in [&a, &u] {
        assert!(run.front_monotone);
        assert!(run.max_mass_step_change <= 1e-6);
    }
}

#[test]
fn sharp_step_is_stationary() {
    // g(n)h(b) and f both vanish on a jump from (0, 1) to (1, 0)
    let m = ModelSpec::smga();
    let run = run_pde(
        &m,
        &PdeConfig {
            initial: InitialData::Step {
                x0: 10.0,
                width: 0.0,
            },
            ..config(10.0)
        },
    )
    .unwrap();
    assert!(run.fronts.iter().all(|&x| x == run.fronts[0]));
    assert_eq!(run.mass_final, run.mass_initial);
}
