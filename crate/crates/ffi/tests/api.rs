use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use strata_ffi::*;

fn corpus(rel: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = strata_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn verifies_the_climate_mutant_through_handles() {
    let path = corpus("climate/climate.mrt");
    let mutant = CString::new("heater-overflow").unwrap();
    let mut sys = ptr::null_mut();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(strata_system_load(path.as_ptr(), mutant.as_ptr(), &mut sys), StrataStatus::Ok);
        assert_eq!(strata_system_component_count(sys), 3);
        assert_eq!(strata_system_verify(sys, true, 2, &mut report), StrataStatus::Ok);
        assert_eq!(strata_report_exit_code(report), 1);
        assert_eq!(strata_report_count(report, StrataVerdict::Fail), 1);
        assert_eq!(strata_report_count(report, StrataVerdict::Skipped), 4);

        let json = strata_report_json(report);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        strata_string_free(json);
        assert!(text.contains("\"short_circuited_at\": \"security\""));

        strata_report_free(report);
        strata_system_free(sys);
    }
}

#[test]
fn clean_system_exits_zero() {
    let path = corpus("paint/paint.mrt");
    let mut sys = ptr::null_mut();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(strata_system_load(path.as_ptr(), ptr::null(), &mut sys), StrataStatus::Ok);
        assert_eq!(strata_system_verify(sys, true, 0, &mut report), StrataStatus::Ok);
        assert_eq!(strata_report_exit_code(report), 0);
        assert_eq!(strata_report_count(report, StrataVerdict::Fail), 0);
        strata_report_free(report);
        strata_system_free(sys);
    }
}

#[test]
fn errors_are_reported_with_codes_and_messages() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(strata_system_load(ptr::null(), ptr::null(), &mut sys), StrataStatus::NullArgument);
        assert!(last_error().contains("path"));

        let missing = CString::new("/no/such/system.mrt").unwrap();
        assert_eq!(strata_system_load(missing.as_ptr(), ptr::null(), &mut sys), StrataStatus::LoadFailed);
        assert!(last_error().contains("/no/such/system.mrt"));
        assert!(sys.is_null());

        let bad = CString::new("proctype P() { a: do :: goto b od }").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(strata_translate_component(bad.as_ptr(), &mut out), StrataStatus::ParseFailed);
        assert!(last_error().contains("unknown label `b`"));

        let invalid = [0xffu8, 0];
        assert_eq!(
            strata_translate_component(invalid.as_ptr().cast(), &mut out),
            StrataStatus::InvalidUtf8
        );

        // Null handles are tolerated.
        strata_system_free(ptr::null_mut());
        strata_report_free(ptr::null_mut());
        strata_string_free(ptr::null_mut());
        assert_eq!(strata_report_exit_code(ptr::null()), 1);
    }
}

#[test]
fn translation_and_version() {
    let src = CString::new("bool b = false; proctype P() { a: do :: b = true od }").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(strata_translate_component(src.as_ptr(), &mut out), StrataStatus::Ok);
        assert!(strata_last_error_message().is_null());
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        strata_string_free(out);
        assert!(text.contains("a -> a { assign b = true; }"));
        let v = CStr::from_ptr(strata_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/strata.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["strata_system_load", "strata_report_json", "strata_last_error_message", "STRATA_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from the header");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let probe = Command::new(&cc).arg("--version").output();
    if probe.is_err() {
        eprintln!("no C compiler available, skipping the compile check");
        return;
    }
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .unwrap();
    assert!(status.success());
}
