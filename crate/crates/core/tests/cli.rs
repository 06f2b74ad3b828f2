use std::fs;
use std::path::Path;
use std::process::Command;

use ioncat::cli::parse_grid;
use ioncat::states::GridKind;
use serde_json::Value;

fn ioncat(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ioncat")).args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn manifest_files(dir: &Path) -> Vec<(String, String)> {
    let m = read_json(&dir.join("manifest.json"));
    m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let path = Path::new(f["path"].as_str().unwrap());
            (path.file_name().unwrap().to_string_lossy().into_owned(), f["sha256"].as_str().unwrap().to_string())
        })
        .collect()
}

#[test]
fn pulse_cat_config_reports_four_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fig.json");
    let out = dir.path().join("out");
    fs::write(
        &config,
        format!(
            r#"{{"protocol": "cat1d-pulses", "eta": 0.5, "n": 2, "omega_ratio": 100, "backend": "numeric",
               "output": {{"directory": {:?}, "grid_points": 81}}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let run = ioncat(&["run", config.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out.join("cat1d-pulses_numeric_report.json"));
    assert_eq!(report["flags"]["four_peaks"], Value::Bool(true));
    let grid = parse_grid(&fs::read_to_string(out.join("cat1d-pulses_numeric_momentum.csv")).unwrap()).unwrap();
    assert_eq!(grid.kind, GridKind::MomentumCoherence);
    assert_eq!(grid.shape(), (81, 81));
    assert_eq!(grid.metadata.get("backend").map(String::as_str), Some("numeric"));
}

#[test]
fn ramsey_run_writes_fringe_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = ioncat(&["ramsey", "--backend", "both", "-o", dir.path().to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(dir.path().join("ramsey_numeric_scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,P_e"));
    assert_eq!(lines.count(), 21);
    let summary = read_json(&dir.path().join("ramsey_numeric_scan.json"));
    assert!(summary["visibility"].as_f64().unwrap() >= 0.95);
    assert!(summary["max_backend_delta"].as_f64().unwrap() < 0.05);
    assert!(dir.path().join("ramsey_comparison.json").exists());
}

#[test]
fn analytic_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let run = ioncat(&["cat2d", "--backend", "analytic", "--grid-points", "41", "-o", dir.path().to_str().unwrap()]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let files = manifest_files(a.path());
    assert_eq!(files, manifest_files(b.path()));
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    for t in ["0.000000", "0.785398", "1.570796", "2.356194", "125.663706"] {
        assert!(names.contains(&format!("cat2d_analytic_vt{t}.csv").as_str()), "{names:?}");
    }
    for (name, _) in &files {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn manifest_lists_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let run = ioncat(&["purity", "--eta", "1.5", "--input", "mixture", "-o", dir.path().to_str().unwrap()]);
    assert!(run.status.success());
    let mut listed: Vec<String> = manifest_files(dir.path()).into_iter().map(|(n, _)| n).collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    present.sort();
    assert_eq!(listed, present);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config"]["input"], "mixture");
    assert_eq!(manifest["config"]["eta"], 1.5);
}

#[test]
fn config_echo_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let run = ioncat(&["cat1d-pulses", "--backend", "analytic", "--n", "1", "-o", first.path().to_str().unwrap()]);
    assert!(run.status.success());
    let manifest = read_json(&first.path().join("manifest.json"));
    let second = tempfile::tempdir().unwrap();
    let mut config = manifest["config"].clone();
    config["output"]["directory"] = Value::String(second.path().to_string_lossy().into_owned());
    let path = second.path().join("echo.json");
    fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let run = ioncat(&["run", path.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(manifest_files(first.path()), manifest_files(second.path()));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"protocol": ""}"#,
        r#"{"protocol": "cat2d", "colour": 1}"#,
        r#"{"protocol": "ramsey", "eta": -2}"#,
        r#"{"protocol": "purity", "tau": 40}"#,
    ];
    for (k, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.json"));
        fs::write(&path, text).unwrap();
        let run = ioncat(&["run", path.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&run.stderr).contains("config error"), "{text}");
    }
    assert_eq!(ioncat(&["ramsey", "--alphas", "0,x"]).status.code(), Some(2));
    assert_eq!(ioncat(&["teleport"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let run = ioncat(&["run", "/nonexistent/config.json"]);
    assert_eq!(run.status.code(), Some(1));
}
