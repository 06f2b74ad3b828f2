use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use ioncat_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ioncat_last_error_message()) }.to_string_lossy().into_owned()
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    let text = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { ioncat_string_free(s) };
    text
}

#[test]
fn cat_report_round_trip() {
    let mut report = ptr::null_mut();
    let status = unsafe { ioncat_run_cat_pulses(IoncatBackend::Numeric, 0.5, 100.0, 2, 0, &mut report) };
    assert_eq!(status, IoncatStatus::Ok, "{}", last_error());
    let mut four = false;
    let key = CString::new("four_peaks").unwrap();
    assert_eq!(unsafe { ioncat_report_flag(report, key.as_ptr(), &mut four) }, IoncatStatus::Ok);
    assert!(four);
    let mut fid = 0.0;
    let key = CString::new("target_fidelity").unwrap();
    assert_eq!(unsafe { ioncat_report_diagnostic(report, key.as_ptr(), &mut fid) }, IoncatStatus::Ok);
    assert!(fid > 0.9);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ioncat_report_to_json(report, &mut json) }, IoncatStatus::Ok);
    assert!(take_string(json).contains("\"four_peaks\":true"));
    unsafe { ioncat_report_free(report) };
}

#[test]
fn unknown_keys_are_invalid_arguments() {
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { ioncat_run_purity(IoncatBackend::Analytic, 1.5, 100.0, false, 0, &mut report) }, IoncatStatus::Ok);
    let mut p = 0.0;
    let key = CString::new("x").unwrap();
    assert_eq!(unsafe { ioncat_report_probability(report, key.as_ptr(), &mut p) }, IoncatStatus::InvalidArgument);
    assert!(last_error().contains("`x`"));
    let key = CString::new("g").unwrap();
    assert_eq!(unsafe { ioncat_report_probability(report, key.as_ptr(), &mut p) }, IoncatStatus::Ok);
    assert!(p > 0.5 && p <= 1.0);
    unsafe { ioncat_report_free(report) };
}

#[test]
fn ramsey_scan_copies_points() {
    let alphas = [0.0, std::f64::consts::PI];
    let mut report = ptr::null_mut();
    let status = unsafe {
        ioncat_run_ramsey(IoncatBackend::Analytic, 2.5, 100.0, 0, alphas.as_ptr(), alphas.len(), 0, &mut report)
    };
    assert_eq!(status, IoncatStatus::Ok, "{}", last_error());
    let mut len = 0;
    assert_eq!(unsafe { ioncat_report_scan(report, ptr::null_mut(), ptr::null_mut(), 0, &mut len) }, IoncatStatus::Ok);
    assert_eq!(len, 2);
    let (mut values, mut results) = ([0.0; 2], [0.0; 2]);
    let status = unsafe { ioncat_report_scan(report, values.as_mut_ptr(), results.as_mut_ptr(), 2, &mut len) };
    assert_eq!(status, IoncatStatus::Ok);
    assert_eq!(values, alphas);
    assert!(results[0] > 0.95 && results[1] < 0.05, "{results:?}");
    unsafe { ioncat_report_free(report) };
}

#[test]
fn bad_parameters_map_to_status_codes() {
    let mut report = ptr::null_mut();
    let status = unsafe { ioncat_run_cat_pulses(IoncatBackend::Analytic, -1.0, 100.0, 1, 0, &mut report) };
    assert_eq!(status, IoncatStatus::InvalidArgument);
    assert!(report.is_null());
    assert_eq!(
        unsafe { ioncat_run_ramsey(IoncatBackend::Analytic, 1.0, 1.0, 0, ptr::null(), 3, 0, &mut report) },
        IoncatStatus::NullPointer
    );
    let mut state = ptr::null_mut();
    assert_eq!(unsafe { ioncat_cat_state_new(IoncatLevel::Ground, 1.0, 0.0, &mut state) }, IoncatStatus::Ok);
    assert_eq!(unsafe { ioncat_state_pulse(state, f64::NAN, IoncatDirection::PlusX, 0.5) }, IoncatStatus::InvalidArgument);
    assert_eq!(unsafe { ioncat_state_wait(ptr::null_mut(), 1.0) }, IoncatStatus::NullPointer);
    unsafe { ioncat_state_free(state) };
    unsafe { ioncat_report_free(ptr::null_mut()) };
    unsafe { ioncat_state_free(ptr::null_mut()) };
}

#[test]
fn config_json_runs_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"protocol": "purity", "eta": 1.5, "backend": "analytic", "output": {{"directory": {:?}}}}}"#,
        dir.path().to_str().unwrap()
    );
    let config = CString::new(config).unwrap();
    let mut manifest = ptr::null_mut();
    let status = unsafe { ioncat_run_config_json(config.as_ptr(), &mut manifest) };
    assert_eq!(status, IoncatStatus::Ok, "{}", last_error());
    let parsed: serde_json::Value = serde_json::from_str(&take_string(manifest)).unwrap();
    assert!(!parsed["files"].as_array().unwrap().is_empty());
    assert!(dir.path().join("manifest.json").exists());

    let bad = CString::new(r#"{"protocol": "purity", "colour": 1}"#).unwrap();
    assert_eq!(unsafe { ioncat_run_config_json(bad.as_ptr(), &mut manifest) }, IoncatStatus::ConfigError);
    assert!(last_error().contains("config error"));
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/ioncat.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 20);
    for name in exports {
        assert!(header.contains(&format!(" {name}(")) || header.contains(&format!("*{name}(")), "{name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ioncat.h");
    match Command::new(&cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&include).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler found; skipping"),
    }
}
