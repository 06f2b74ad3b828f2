//! C interface to the ioncat simulator.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! [`IoncatStatus`]; on failure the message is available from
//! [`ioncat_last_error_message`] on the same thread. Panics never unwind
//! into C: they are caught and reported as [`IoncatStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ioncat::analytic::{self, Direction};
use ioncat::cli::{amplitude_bound, run_experiment, ExperimentConfig};
use ioncat::protocols::{
    prepare_cat_pulses, purity_probe, ramsey_scan, AnalyticBackend, GridOptions, NumericBackend, Protocol,
    ProtocolReport, PurityInput, RamseyOptions, WaitTiming,
};
use ioncat::states::{default_truncation, InternalLevel, QuantumState, SuperpositionState};
use ioncat::{Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoncatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericFailure = 4,
    IoError = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoncatBackend {
    Analytic = 0,
    Numeric = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoncatLevel {
    Ground = 0,
    Excited = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoncatDirection {
    PlusX = 0,
    MinusX = 1,
}

/// Superposition of coherent states of one motional mode.
pub struct IoncatState(SuperpositionState);

/// Result of a protocol run.
pub struct IoncatReport(ProtocolReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn status_of(error: &Error) -> IoncatStatus {
    match error {
        Error::Config { .. } => IoncatStatus::ConfigError,
        Error::InvalidParameter { .. } | Error::ZeroNorm | Error::ZeroProbability { .. } => {
            IoncatStatus::InvalidArgument
        }
        Error::Integrator(_) | Error::Convergence { .. } => IoncatStatus::NumericFailure,
        Error::Io(_) => IoncatStatus::IoError,
        _ => IoncatStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> IoncatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => IoncatStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("`{name}` is a null pointer"));
            IoncatStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(message))) => {
            set_error(message);
            IoncatStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            IoncatStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, name: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes a pointer obtained from this library or null.
    unsafe { ptr.as_ref() }.ok_or(Failure::Null(name))
}

unsafe fn borrow_mut<'a, T>(ptr: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: as for `borrow`, and the caller holds no other reference.
    unsafe { ptr.as_mut() }.ok_or(Failure::Null(name))
}

unsafe fn string_arg<'a>(ptr: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Failure::Invalid(format!("`{name}` is not valid UTF-8")))
}

fn level(l: IoncatLevel) -> InternalLevel {
    match l {
        IoncatLevel::Ground => InternalLevel::Ground,
        IoncatLevel::Excited => InternalLevel::Excited,
    }
}

fn into_c_string(text: String) -> Result<*mut c_char, Failure> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| Failure::Invalid("output contains a NUL byte".into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ioncat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ioncat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn ioncat_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// ⟨α|β⟩ for two coherent states.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_coherent_overlap(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> IoncatStatus {
    guard(|| {
        let re = unsafe { borrow_mut(out_re, "out_re")? };
        let im = unsafe { borrow_mut(out_im, "out_im")? };
        let z = analytic::coherent_overlap(Complex64::new(alpha_re, alpha_im), Complex64::new(beta_re, beta_im));
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Coherent state |level⟩|α⟩.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_coherent_state_new(
    internal: IoncatLevel,
    alpha_re: f64,
    alpha_im: f64,
    out: *mut *mut IoncatState,
) -> IoncatStatus {
    guard(|| {
        let slot = unsafe { borrow_mut(out, "out")? };
        let state = SuperpositionState::coherent(level(internal), Complex64::new(alpha_re, alpha_im));
        *slot = Box::into_raw(Box::new(IoncatState(state)));
        Ok(())
    })
}

/// Normalized cat K(|α⟩ + |−α⟩)|level⟩.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_cat_state_new(
    internal: IoncatLevel,
    alpha_re: f64,
    alpha_im: f64,
    out: *mut *mut IoncatState,
) -> IoncatStatus {
    guard(|| {
        let slot = unsafe { borrow_mut(out, "out")? };
        let state = SuperpositionState::cat(level(internal), Complex64::new(alpha_re, alpha_im))?;
        *slot = Box::into_raw(Box::new(IoncatState(state)));
        Ok(())
    })
}

/// # Safety
/// `state` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn ioncat_state_free(state: *mut IoncatState) {
    if !state.is_null() {
        // SAFETY: produced by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Applies a strong-excitation pulse of the given area in place.
///
/// # Safety
/// `state` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ioncat_state_pulse(
    state: *mut IoncatState,
    area: f64,
    direction: IoncatDirection,
    eta: f64,
) -> IoncatStatus {
    guard(|| {
        let state = unsafe { borrow_mut(state, "state")? };
        if !area.is_finite() {
            return Err(Failure::Invalid("`area` must be finite".into()));
        }
        let dir = match direction {
            IoncatDirection::PlusX => Direction::PLUS_X,
            IoncatDirection::MinusX => Direction::MINUS_X,
        };
        state.0 = analytic::apply_kick(&state.0, &analytic::KickCoefficients::pulse(area), dir, eta)?;
        Ok(())
    })
}

/// Free evolution for time `t` in units of 1/ν, in place.
///
/// # Safety
/// `state` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ioncat_state_wait(state: *mut IoncatState, t: f64) -> IoncatStatus {
    guard(|| {
        let state = unsafe { borrow_mut(state, "state")? };
        state.0 = analytic::free_evolve(&state.0, t)?;
        Ok(())
    })
}

/// Ground and excited populations of a state.
///
/// # Safety
/// `state` must be a live handle; `out_g` and `out_e` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_state_probabilities(
    state: *const IoncatState,
    out_g: *mut f64,
    out_e: *mut f64,
) -> IoncatStatus {
    guard(|| {
        let state = unsafe { borrow(state, "state")? };
        let g = unsafe { borrow_mut(out_g, "out_g")? };
        let e = unsafe { borrow_mut(out_e, "out_e")? };
        [*g, *e] = analytic::level_probabilities(&state.0)?;
        Ok(())
    })
}

/// ⟨state|state⟩.
///
/// # Safety
/// `state` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_state_norm_sqr(state: *const IoncatState, out: *mut f64) -> IoncatStatus {
    guard(|| {
        let state = unsafe { borrow(state, "state")? };
        *unsafe { borrow_mut(out, "out")? } = state.0.norm_sqr();
        Ok(())
    })
}

fn numeric_backend(protocol: Protocol, eta: f64, omega: f64, n: usize, cutoff: usize) -> Result<NumericBackend, Error> {
    let cutoff = if cutoff == 0 { default_truncation(amplitude_bound(protocol, eta, n)) } else { cutoff };
    NumericBackend::new(eta, omega, cutoff)
}

fn store(out: *mut *mut IoncatReport, report: ProtocolReport) -> Result<(), Failure> {
    let slot = unsafe { borrow_mut(out, "out")? };
    *slot = Box::into_raw(Box::new(IoncatReport(report)));
    Ok(())
}

/// Pulse-train cat preparation with `n` intermediate pulse pairs. A zero
/// `cutoff` picks the Fock truncation automatically; it is ignored by the
/// analytic backend.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_run_cat_pulses(
    backend: IoncatBackend,
    eta: f64,
    omega_ratio: f64,
    n: u32,
    cutoff: u32,
    out: *mut *mut IoncatReport,
) -> IoncatStatus {
    guard(|| {
        let grid = GridOptions::default();
        let n = n as usize;
        let report = match backend {
            IoncatBackend::Analytic => prepare_cat_pulses(&AnalyticBackend::new(eta, omega_ratio)?, n, &grid, None)?,
            IoncatBackend::Numeric => {
                let b = numeric_backend(Protocol::Cat1dPulses, eta, omega_ratio, n, cutoff as usize)?;
                prepare_cat_pulses(&b, n, &grid, Some(b.cutoff()))?
            }
        };
        store(out, report)
    })
}

/// Purity probe on the cat (`mixture` false) or the matching mixture.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_run_purity(
    backend: IoncatBackend,
    eta: f64,
    omega_ratio: f64,
    mixture: bool,
    cutoff: u32,
    out: *mut *mut IoncatReport,
) -> IoncatStatus {
    guard(|| {
        let input = if mixture { PurityInput::Mixture } else { PurityInput::Cat }.ensemble(eta)?;
        let grid = GridOptions::default();
        let timing = WaitTiming::default();
        let report = match backend {
            IoncatBackend::Analytic => purity_probe(&AnalyticBackend::new(eta, omega_ratio)?, &input, timing, &grid)?,
            IoncatBackend::Numeric => purity_probe(
                &numeric_backend(Protocol::Purity, eta, omega_ratio, 0, cutoff as usize)?,
                &input,
                timing,
                &grid,
            )?,
        };
        store(out, report)
    })
}

/// Interferometer phase scan over `count` rotation angles.
///
/// # Safety
/// `alphas` must point to `count` readable doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_run_ramsey(
    backend: IoncatBackend,
    eta: f64,
    omega_ratio: f64,
    n: u32,
    alphas: *const f64,
    count: usize,
    cutoff: u32,
    out: *mut *mut IoncatReport,
) -> IoncatStatus {
    guard(|| {
        if alphas.is_null() {
            return Err(Failure::Null("alphas"));
        }
        // SAFETY: the caller guarantees `count` readable values.
        let alphas = unsafe { std::slice::from_raw_parts(alphas, count) }.to_vec();
        let options = RamseyOptions { n: n as usize, alphas, ..Default::default() };
        let report = match backend {
            IoncatBackend::Analytic => ramsey_scan(&AnalyticBackend::new(eta, omega_ratio)?, &options)?,
            IoncatBackend::Numeric => ramsey_scan(
                &numeric_backend(Protocol::Ramsey, eta, omega_ratio, options.n, cutoff as usize)?,
                &options,
            )?,
        };
        store(out, report)
    })
}

/// # Safety
/// `report` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_free(report: *mut IoncatReport) {
    if !report.is_null() {
        // SAFETY: produced by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(report) });
    }
}

unsafe fn lookup<T: Copy>(
    report: *const IoncatReport,
    key: *const c_char,
    out: *mut T,
    find: impl Fn(&ProtocolReport, &str) -> Option<T>,
) -> IoncatStatus {
    guard(|| {
        let report = unsafe { borrow(report, "report")? };
        let key = unsafe { string_arg(key, "key")? };
        let slot = unsafe { borrow_mut(out, "out")? };
        *slot = find(&report.0, key).ok_or_else(|| Failure::Invalid(format!("report has no entry `{key}`")))?;
        Ok(())
    })
}

/// Outcome probability `"g"` or `"e"`.
///
/// # Safety
/// `report` must be a live handle, `key` a NUL-terminated string and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_probability(
    report: *const IoncatReport,
    key: *const c_char,
    out: *mut f64,
) -> IoncatStatus {
    unsafe { lookup(report, key, out, |r, k| r.probability(k)) }
}

/// Named diagnostic such as `"target_fidelity"` or `"visibility"`.
///
/// # Safety
/// As for [`ioncat_report_probability`].
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_diagnostic(
    report: *const IoncatReport,
    key: *const c_char,
    out: *mut f64,
) -> IoncatStatus {
    unsafe { lookup(report, key, out, |r, k| r.diagnostics.get(k).copied()) }
}

/// Named flag such as `"four_peaks"`.
///
/// # Safety
/// As for [`ioncat_report_probability`].
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_flag(
    report: *const IoncatReport,
    key: *const c_char,
    out: *mut bool,
) -> IoncatStatus {
    unsafe { lookup(report, key, out, |r, k| r.flag(k)) }
}

/// Copies up to `capacity` scan points into `values` and `results` and
/// writes the number of points to `out_len`. Call with `capacity` 0 to
/// query the length.
///
/// # Safety
/// `values` and `results` must have room for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_scan(
    report: *const IoncatReport,
    values: *mut f64,
    results: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> IoncatStatus {
    guard(|| {
        let report = unsafe { borrow(report, "report")? };
        let len = unsafe { borrow_mut(out_len, "out_len")? };
        let scan = report.0.scan.as_ref().ok_or_else(|| Failure::Invalid("report has no scan".into()))?;
        *len = scan.values.len();
        let count = capacity.min(scan.values.len());
        if count > 0 {
            if values.is_null() || results.is_null() {
                return Err(Failure::Null("values"));
            }
            // SAFETY: the caller guarantees `capacity` writable values.
            unsafe {
                ptr::copy_nonoverlapping(scan.values.as_ptr(), values, count);
                ptr::copy_nonoverlapping(scan.results.as_ptr(), results, count);
            }
        }
        Ok(())
    })
}

/// The report as JSON; release with [`ioncat_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_report_to_json(report: *const IoncatReport, out: *mut *mut c_char) -> IoncatStatus {
    guard(|| {
        let report = unsafe { borrow(report, "report")? };
        let slot = unsafe { borrow_mut(out, "out")? };
        *slot = into_c_string(serde_json::to_string(&report.0).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Runs a JSON experiment config exactly as the command-line tool does,
/// writing files to its output directory. The run manifest is returned as
/// JSON; release it with [`ioncat_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_manifest` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ioncat_run_config_json(config: *const c_char, out_manifest: *mut *mut c_char) -> IoncatStatus {
    guard(|| {
        let text = unsafe { string_arg(config, "config")? };
        let slot = unsafe { borrow_mut(out_manifest, "out_manifest")? };
        let manifest = run_experiment(&ExperimentConfig::from_json(text)?)?;
        *slot = into_c_string(serde_json::to_string(&manifest).map_err(Error::from)?)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(ioncat_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn overlap_of_identical_states_is_one() {
        let (mut re, mut im) = (0.0, 0.0);
        let status = unsafe { ioncat_coherent_overlap(0.3, -1.0, 0.3, -1.0, &mut re, &mut im) };
        assert_eq!(status, IoncatStatus::Ok);
        assert!((re - 1.0).abs() < 1e-15 && im.abs() < 1e-15);
    }

    #[test]
    fn null_outputs_are_reported() {
        let status = unsafe { ioncat_coherent_overlap(0.0, 0.0, 0.0, 0.0, ptr::null_mut(), ptr::null_mut()) };
        assert_eq!(status, IoncatStatus::NullPointer);
        assert!(last_error().contains("out_re"));
    }

    #[test]
    fn state_handle_lifecycle() {
        let mut state = ptr::null_mut();
        assert_eq!(unsafe { ioncat_coherent_state_new(IoncatLevel::Ground, 0.0, 0.0, &mut state) }, IoncatStatus::Ok);
        let status = unsafe { ioncat_state_pulse(state, std::f64::consts::PI, IoncatDirection::PlusX, 0.5) };
        assert_eq!(status, IoncatStatus::Ok);
        let (mut g, mut e) = (0.0, 0.0);
        assert_eq!(unsafe { ioncat_state_probabilities(state, &mut g, &mut e) }, IoncatStatus::Ok);
        assert!(g < 1e-15 && (e - 1.0).abs() < 1e-15);
        unsafe { ioncat_state_free(state) };
    }

    #[test]
    fn version_is_the_crate_version() {
        let v = unsafe { CStr::from_ptr(ioncat_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
