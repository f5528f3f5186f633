//! C interface to the verifier. Systems and reports are opaque handles
//! released with their `_free` function. Every fallible call returns a
//! [`StrataStatus`]; on failure [`strata_last_error_message`] describes it.
//! Strings returned as `char *` are owned by the caller and released with
//! [`strata_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use strata::checker::Status;
use strata::dsl::{export_uppaal_like, parse_component};
use strata::explore::ExploreOptions;
use strata::system::{load_system, LoadOptions, SystemSpec};
use strata::verifier::{verify_system, VerificationReport, VerifyOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrataStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    LoadFailed = 3,
    ParseFailed = 4,
    Panicked = 5,
}

/// Verdict kinds, for counting with [`strata_report_count`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrataVerdict {
    Pass = 0,
    Fail = 1,
    Skipped = 2,
    AssumptionViolated = 3,
    Error = 4,
}

impl From<StrataVerdict> for Status {
    fn from(v: StrataVerdict) -> Status {
        match v {
            StrataVerdict::Pass => Status::Pass,
            StrataVerdict::Fail => Status::Fail,
            StrataVerdict::Skipped => Status::Skipped,
            StrataVerdict::AssumptionViolated => Status::AssumptionViolated,
            StrataVerdict::Error => Status::Error,
        }
    }
}

pub struct StrataSystem {
    spec: SystemSpec,
}

pub struct StrataReport {
    report: VerificationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guarded<F>(f: F) -> StrataStatus
where
    F: FnOnce() -> Result<(), (StrataStatus, String)>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StrataStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StrataStatus::Panicked
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (StrataStatus, String)> {
    if p.is_null() {
        return Err((StrataStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (StrataStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn out_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the last failed call on this thread, or null. Valid
/// until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn strata_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn strata_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a `.mrt` system. `mutant` may be null.
///
/// # Safety
/// `path` and a non-null `mutant` must be NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn strata_system_load(
    path: *const c_char,
    mutant: *const c_char,
    out: *mut *mut StrataSystem,
) -> StrataStatus {
    guarded(|| {
        if out.is_null() {
            return Err((StrataStatus::NullArgument, "out is null".into()));
        }
        let path = str_arg(path, "path")?;
        let mutant = if mutant.is_null() {
            None
        } else {
            Some(str_arg(mutant, "mutant")?.to_string())
        };
        let opts = LoadOptions {
            mutant,
            narrow: Vec::new(),
        };
        let spec = load_system(Path::new(path), &opts)
            .map_err(|e| (StrataStatus::LoadFailed, e.to_string()))?;
        *out = Box::into_raw(Box::new(StrataSystem { spec }));
        Ok(())
    })
}

/// Number of components in a loaded system.
///
/// # Safety
/// `system` must be null or a live handle from [`strata_system_load`].
#[no_mangle]
pub unsafe extern "C" fn strata_system_component_count(system: *const StrataSystem) -> usize {
    system.as_ref().map_or(0, |s| s.spec.components.len())
}

/// # Safety
/// `system` must be null or a handle from [`strata_system_load`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn strata_system_free(system: *mut StrataSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Verifies every layer of `system`. `workers` of 0 means 1.
///
/// # Safety
/// `system` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn strata_system_verify(
    system: *const StrataSystem,
    short_circuit: bool,
    workers: u32,
    out: *mut *mut StrataReport,
) -> StrataStatus {
    guarded(|| {
        let system = system
            .as_ref()
            .ok_or((StrataStatus::NullArgument, "system is null".to_string()))?;
        if out.is_null() {
            return Err((StrataStatus::NullArgument, "out is null".into()));
        }
        let opts = VerifyOptions {
            short_circuit,
            explore: ExploreOptions {
                workers: workers.max(1) as usize,
                ..Default::default()
            },
            include_timings: false,
        };
        let report = verify_system(&system.spec, &opts);
        *out = Box::into_raw(Box::new(StrataReport { report }));
        Ok(())
    })
}

/// Process exit code the command line would use: 0 when every evaluated
/// property passed, 1 otherwise (also for a null handle).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn strata_report_exit_code(report: *const StrataReport) -> i32 {
    report.as_ref().map_or(1, |r| r.report.exit_code())
}

/// How many verdicts of kind `kind` the report holds.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn strata_report_count(report: *const StrataReport, kind: StrataVerdict) -> usize {
    report
        .as_ref()
        .map_or(0, |r| r.report.totals.get(Status::from(kind).as_str()).copied().unwrap_or(0))
}

/// The report as JSON; release with [`strata_string_free`]. Null for a
/// null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn strata_report_json(report: *const StrataReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| out_string(r.report.to_json()))
}

/// # Safety
/// `report` must be null or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn strata_report_free(report: *mut StrataReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Parses component source and renders it as a timed-automata template.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn strata_translate_component(
    source: *const c_char,
    out: *mut *mut c_char,
) -> StrataStatus {
    guarded(|| {
        if out.is_null() {
            return Err((StrataStatus::NullArgument, "out is null".into()));
        }
        let src = str_arg(source, "source")?;
        let c = parse_component(src).map_err(|e| (StrataStatus::ParseFailed, e.to_string()))?;
        *out = out_string(export_uppaal_like(&c));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn strata_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
