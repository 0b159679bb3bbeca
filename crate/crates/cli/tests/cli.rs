use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_degenwave");

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn model(name: &str) -> String {
    root().join("models").join(name).display().to_string()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("spawn degenwave")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{schema}.schema.json"));
    let validator = jsonschema::validator_for(&read_json(&path)).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

fn csv_header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap_or_default().to_string()
}

#[test]
fn model_files_match_schema() {
    for name in ["smga.json", "monod.json", "steep.json"] {
        assert_valid("model", &read_json(Path::new(&model(name))));
    }
    assert!(!jsonschema::is_valid(
        &read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/model.schema.json")),
        &serde_json::json!({ "family": "power_law", "alpha": 1.0 })
    ));
}

#[test]
fn bounds_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["--out", "o", "bounds"]);
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    let file = read_json(&tmp.path().join("o/bounds.json"));
    assert_eq!(stdout, file);
    assert_valid("bounds", &file);
    assert_valid("manifest", &read_json(&tmp.path().join("o/manifest.json")));
    assert!((file["c_sharp"].as_f64().unwrap() - 1.0 / 12f64.sqrt()).abs() < 1e-8);
    assert!((file["c_star"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(
        csv_header(&tmp.path().join("o/bounds.csv")),
        "c_sharp_branch1,c_sharp_branch2,c_sharp,c_star,branch1_error,branch2_error,dominant_branch"
    );
}

#[test]
fn shoot_output_and_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["--out", "o", "shoot", "--speed", "0.9"]);
    let shot = read_json(&tmp.path().join("o/shot.json"));
    assert_valid("shot", &shot);
    assert_eq!(shot["admissibility"], "admissible");
    assert_eq!(
        csv_header(&tmp.path().join("o/trajectory.csv")),
        "eta,b,db,gap"
    );

    ok(tmp.path(), &["--out", "low", "shoot", "--speed", "0.2"]);
    let low = read_json(&tmp.path().join("low/shot.json"));
    assert_valid("shot", &low);
    assert_eq!(low["admissibility"], "non_admissible");
}

#[test]
fn speed_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["--out", "o", "speed"]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid("speed", &report);
    let c0 = report["c0"].as_f64().unwrap();
    assert!((0.2887..=2.0).contains(&c0));
    assert!(report["bracket_width"].as_f64().unwrap() <= 1e-3);
    assert!(csv_header(&tmp.path().join("o/speed_samples.csv")).starts_with("c,admissible"));
}

#[test]
fn profile_output_with_figure() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        tmp.path(),
        &[
            "--out",
            "o",
            "profile",
            "--speed",
            "1.2",
            "--svg",
            "fig/p.svg",
        ],
    );
    let p = read_json(&tmp.path().join("o/profile.json"));
    assert_valid("profile", &p);
    assert_eq!(p["tau"]["kind"], "infinite");
    assert_eq!(p["residual"]["passed"], true);
    assert_eq!(
        csv_header(&tmp.path().join("o/profile.csv")),
        "xi,eta,beta,dbeta,residual"
    );
    let svg = fs::read_to_string(tmp.path().join("fig/p.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    let manifest = read_json(&tmp.path().join("o/manifest.json"));
    assert_valid("manifest", &manifest);
    assert!(manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|o| o.as_str().unwrap().ends_with("p.svg")));
}

#[test]
fn non_admissible_profile_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["profile", "--speed", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pde_output() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        tmp.path(),
        &[
            "--out", "o", "pde", "--cells", "1200", "--length", "120", "--time", "80",
        ],
    );
    let run = read_json(&tmp.path().join("o/pde.json"));
    assert_valid("pde", &run);
    let v = run["speed"].as_f64().unwrap();
    assert!((v - 0.705).abs() < 0.02, "speed {v}");
    assert_eq!(csv_header(&tmp.path().join("o/fronts.csv")), "t,x_front");
}

#[test]
fn sweep_output_and_empty_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(tmp.path(), &["--out", "o", "sweep", "--alpha", "1,2,3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    let dominant: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(6).unwrap())
        .collect();
    assert_eq!(dominant, ["1", "tie", "2"]);
    assert_valid("sweep", &read_json(&tmp.path().join("o/sweep.json")));

    let out = ok(tmp.path(), &["sweep", "--alpha", ""]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn sweep_with_speeds_reports_c0() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        tmp.path(),
        &["--out", "o", "sweep", "--alpha", "1,3", "--speeds"],
    );
    let sweep = read_json(&tmp.path().join("o/sweep.json"));
    assert_valid("sweep", &sweep);
    let rows = sweep["rows"].as_array().unwrap();
    assert!(rows[0]["c0"].as_f64().is_some());
    assert!(rows[1]["c0"].is_null());
    assert!(rows[1]["status"]
        .as_str()
        .unwrap()
        .starts_with("bounds_only"));
}

#[test]
fn bounds_only_report_is_partial() {
    let tmp = tempfile::tempdir().unwrap();
    let steep = model("steep.json");
    ok(tmp.path(), &["--model", &steep, "--out", "o", "report"]);
    let report = read_json(&tmp.path().join("o/report.json"));
    assert_valid("report", &report);
    assert_eq!(report["bounds"]["status"], "ok");
    assert_eq!(report["speed"]["status"], "skipped");
    assert!(report["c0_vs_sqrt_half"].is_null());
}

#[test]
fn report_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        ok(dir, &["--out", "o", "report"]);
    }
    let report = read_json(&a.path().join("o/report.json"));
    assert_valid("report", &report);
    for section in [
        "bounds",
        "speed",
        "threshold_regime",
        "sharp_profile",
        "classical_profile",
    ] {
        assert_eq!(report[section]["status"], "ok", "{section}");
    }
    assert_eq!(report["threshold_regime"]["value"]["regime"], "sharp");
    assert_eq!(report["sharp_profile"]["value"]["tau"]["kind"], "finite");
    assert_eq!(
        report["classical_profile"]["value"]["tau"]["kind"],
        "infinite"
    );

    let manifest = read_json(&a.path().join("o/manifest.json"));
    assert_valid("manifest", &manifest);
    for name in manifest["outputs"].as_array().unwrap() {
        let name = name.as_str().unwrap();
        let x = fs::read(a.path().join("o").join(name)).unwrap();
        let y = fs::read(b.path().join("o").join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    assert_eq!(
        fs::read(a.path().join("o/manifest.json")).unwrap(),
        fs::read(b.path().join("o/manifest.json")).unwrap()
    );
}

#[test]
fn cache_reuses_shots() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["--cache", "cache", "shoot", "--speed", "0.8"];
    let first = ok(tmp.path(), &args);
    let entries = fs::read_dir(tmp.path().join("cache")).unwrap().count();
    assert!(entries >= 1);
    let second = ok(tmp.path(), &args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(
        fs::read_dir(tmp.path().join("cache")).unwrap().count(),
        entries
    );
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.json"), "{bad").unwrap();
    fs::write(
        tmp.path().join("unknown.json"),
        r#"{"family":"power_law","alpha":1,"gamma":1,"reaction":{"kind":"product"},"extra":1}"#,
    )
    .unwrap();
    let code = |args: &[&str]| run_in(tmp.path(), args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&["bounds"]), Some(0));
    assert_eq!(code(&["--model", "bad.json", "bounds"]), Some(1));
    assert_eq!(code(&["--model", "unknown.json", "bounds"]), Some(1));
    assert_eq!(code(&["--model", "missing.json", "bounds"]), Some(1));
    assert_eq!(code(&["shoot", "--speed", "-1"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["--json", "--csv", "bounds"]), Some(1));
}
