use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn finslerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finslerlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs a command on a scenario file and returns the exit code and parsed report.
fn run(command: &str, scenario: &Path, extra: &[&str]) -> (i32, Option<Value>) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut args = vec![command, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = finslerlab(&args);
    let report = std::fs::read_to_string(&out).ok().map(|t| serde_json::from_str(&t).unwrap());
    (o.status.code().unwrap(), report)
}

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn helicoid_surface_report_lists_twenty_five_samples() {
    let (code, report) = run("surface-report", &scenario("helicoid.json"), &[]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(report["passed"], true);
    let samples = report["payload"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 25);
    for s in samples {
        let k: Vec<f64> = s["report"]["principal_curvatures"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert!((k[0] + 1.0).abs() <= 1e-6 && (k[1] - 1.0).abs() <= 1e-6, "{k:?}");
    }
}

#[test]
fn short_wind_is_a_configuration_error() {
    let o = finslerlab(&["validate-metric", "--scenario", scenario("kropina-wind-0.9.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotUnitWind"));
}

#[test]
fn malformed_scenarios_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "{ not json",
        r#"{"metric": {"kind": "euclidean", "dim": 3}, "surfce": {}}"#,
        r#"{"schema_version": 2}"#,
        r#"{"metric": {"kind": "euclidean", "dim": 3}, "tolerance": 0}"#,
    ] {
        let (code, report) = run("surface-report", &write(dir.path(), text), &[]);
        assert_eq!(code, 2, "{text}");
        assert!(report.is_none());
    }
    let missing = finslerlab(&["surface-report", "--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let no_scenario = finslerlab(&["surface-report"]);
    assert_eq!(no_scenario.status.code(), Some(2));
}

#[test]
fn negative_control_field_exits_with_one() {
    let (code, report) = run("isoparametric-check", &scenario("isoparametric-negative.json"), &[]);
    assert_eq!(code, 1);
    let report = report.unwrap();
    let failed: Vec<&Value> = report["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(!failed.is_empty());
}

#[test]
fn failures_carry_the_sample_and_both_values() {
    // A false expectation: the Euclidean sphere of radius 2 has curvature −1/2.
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        r#"{"metric": {"kind": "euclidean", "dim": 3},
            "surface": {"family": "sphere", "radius": 2.0, "u": [0.3, 2.8, 2], "v": [0.0, 6.0, 2]},
            "expect": {"principal_curvatures": [-1.0, -1.0]}}"#,
    );
    let (code, report) = run("surface-report", &path, &[]);
    assert_eq!(code, 1);
    let report = report.unwrap();
    let check = report["checks"].as_array().unwrap().iter().find(|c| c["passed"] == false).unwrap();
    let worst = &check["worst"];
    assert_eq!(worst["sample"].as_array().unwrap().len(), 2);
    assert_eq!(worst["want"], serde_json::json!([-1.0, -1.0]));
    let got = worst["got"].as_array().unwrap();
    assert!(got.iter().all(|k| (k.as_f64().unwrap() + 0.5).abs() < 1e-9));
}

#[test]
fn tolerance_override_can_fail_a_passing_run() {
    let (code, _) = run("surface-report", &scenario("helicoid.json"), &["--tol", "1e-18"]);
    assert_eq!(code, 1);
    let (code, _) = run("surface-report", &scenario("helicoid.json"), &["--tol", "-1"]);
    assert_eq!(code, 2);
}

#[test]
fn identical_runs_differ_only_in_wall_clock() {
    let strip = |text: String| -> String {
        text.lines()
            .filter(|l| !l.trim_start().starts_with("\"wall_clock_seconds\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for (command, file) in [
        ("validate-metric", "kropina-e3.json"),
        ("isoparametric-check", "isoparametric-kropina-height.json"),
    ] {
        let texts: Vec<String> = (0..2)
            .map(|_| {
                let o = finslerlab(&[command, "--scenario", scenario(file).to_str().unwrap(), "--seed", "11"]);
                assert_eq!(o.status.code(), Some(0));
                strip(String::from_utf8(o.stdout).unwrap())
            })
            .collect();
        assert_eq!(texts[0], texts[1], "{command}");
    }
}

#[test]
fn reals_are_written_with_seventeen_digits() {
    let o = finslerlab(&["validate-metric", "--scenario", scenario("kropina-e3.json").to_str().unwrap()]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"tolerance\": 9.9999999999999995e-7"));
}

#[test]
fn every_shipped_scenario_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        finslerlab_cli::Scenario::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}

#[test]
fn reproduce_paper_subset_and_corrupted_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), r#"{"suite": {"only": [1, 3]}}"#);
    let (code, report) = run("reproduce-paper", &path, &[]);
    assert_eq!(code, 0);
    let criteria = report.unwrap()["payload"]["criteria"].as_array().unwrap().clone();
    assert_eq!(criteria.iter().map(|c| c["id"].as_u64().unwrap()).collect::<Vec<_>>(), [1, 3]);

    let (code, report) = run("reproduce-paper", &path, &["--corrupted-phi"]);
    assert_eq!(code, 1);
    let report = report.unwrap();
    let helicoid = &report["payload"]["criteria"][0];
    assert_eq!(helicoid["passed"], false);
    assert!(helicoid["max_deviation"].as_f64().unwrap() > 0.5);
}

#[test]
fn documented_records_parse() {
    use finslerlab::{DerivativeMode, FieldDescription, MetricDescription, SurfaceDescription, VolumeForm};
    use finslerlab_cli::scenario::LevelSpec;

    let doc = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenario.md")).unwrap();
    let mut section = "";
    let mut record = String::new();
    let mut parsed = 0;
    for line in doc.lines() {
        if let Some(h) = line.strip_prefix("## ") {
            section = h;
            continue;
        }
        let t = line.trim();
        if !(t.starts_with('{') || !record.is_empty()) || t.starts_with("{\"corrupted") {
            continue;
        }
        // Records may span lines inside code blocks.
        record.push_str(t);
        if record.matches('{').count() != record.matches('}').count() {
            continue;
        }
        let text = std::mem::take(&mut record);
        let ok = match section {
            "Metric records" => serde_json::from_str::<MetricDescription>(&text)
                .map_err(|e| e.to_string())
                .and_then(|d| d.build(DerivativeMode::Exact).map(|_| ()).map_err(|e| e.to_string())),
            "Volume records" => serde_json::from_str::<VolumeForm>(&text).map(|_| ()).map_err(|e| e.to_string()),
            "Surface records" => serde_json::from_str::<SurfaceDescription>(&text)
                .map(|_| ())
                .map_err(|e| e.to_string()),
            "Field and level records" if text.contains("\"values\"") => {
                serde_json::from_str::<LevelSpec>(&text).map(|_| ()).map_err(|e| e.to_string())
            }
            "Field and level records" => serde_json::from_str::<FieldDescription>(&text)
                .map_err(|e| e.to_string())
                .and_then(|f| f.build(3).map(|_| ()).map_err(|e| e.to_string())),
            _ => continue,
        };
        ok.unwrap_or_else(|e| panic!("{section}: {text}: {e}"));
        parsed += 1;
    }
    assert!(parsed >= 19, "{parsed}");
}
