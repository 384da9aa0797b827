//! C ABI over `favlab`.
//!
//! Objects are opaque heap handles released with their `_free` function. Every
//! call returns a [`FavStatus`]; on failure, [`fav_last_error_message`] describes
//! the error on the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use favlab::favard::{buffon_estimate, favard_length, QuadratureConfig};
use favlab::ifs::DEFAULT_ENUMERATION_CAP;
use favlab::shadow::{maximal_profile_with_cap, multiplicity_with_cap, StepFunction};
use favlab::spectral::{nu_hat_eval, Direction};
use favlab::{Error, SimilaritySystem};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    UnknownPreset = 3,
    CapExceeded = 4,
    NoConvergence = 5,
    Parse = 6,
    Numerical = 7,
    Panic = 8,
}

/// A similarity system.
pub struct FavSystem(SimilaritySystem);

/// A piecewise-constant multiplicity function.
pub struct FavStepFunction(StepFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FavStatus {
    match e {
        Error::UnknownPreset(_) => FavStatus::UnknownPreset,
        Error::EnumerationCapExceeded { .. } => FavStatus::CapExceeded,
        Error::NoConvergence { .. } => FavStatus::NoConvergence,
        Error::Parse(_) => FavStatus::Parse,
        Error::ContourThroughZero { .. } | Error::DegenerateSeries(_) => FavStatus::Numerical,
        _ => FavStatus::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FavStatusError>) -> FavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FavStatus::Ok,
        Ok(Err(FavStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FavStatus::Panic
        }
    }
}

struct FavStatusError(FavStatus, String);

impl From<Error> for FavStatusError {
    fn from(e: Error) -> Self {
        FavStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> FavStatusError {
    FavStatusError(FavStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, FavStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FavStatusError(FavStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, FavStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), FavStatusError> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failing call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn fav_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a preset system (`gasket`, `corner4`, `random-<L>-<seed>`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_system_preset(name: *const c_char, out: *mut *mut FavSystem) -> FavStatus {
    guard(|| {
        let sys = favlab::preset(str_arg(name, "name")?)?;
        write(out, Box::into_raw(Box::new(FavSystem(sys))), "out")
    })
}

/// Parses a system file (the JSON written by `favlab gen`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_system_from_json(json: *const c_char, out: *mut *mut FavSystem) -> FavStatus {
    guard(|| {
        let sys = SimilaritySystem::from_json(str_arg(json, "json")?)?;
        write(out, Box::into_raw(Box::new(FavSystem(sys))), "out")
    })
}

/// # Safety
/// `sys` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn fav_system_free(sys: *mut FavSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of maps and their common contraction ratio.
///
/// # Safety
/// `sys` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_system_info(sys: *const FavSystem, maps: *mut usize, ratio: *mut f64) -> FavStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        write(maps, sys.len(), "maps")?;
        write(ratio, sys.ratio(), "ratio")
    })
}

/// Favard length of the depth-`n` generation by adaptive quadrature.
///
/// A result that missed `target_rel_error` is still written, with `converged` set to 0.
///
/// # Safety
/// `sys` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_favard_length(
    sys: *const FavSystem,
    n: usize,
    grid: usize,
    refinements: usize,
    target_rel_error: f64,
    value: *mut f64,
    error_estimate: *mut f64,
    converged: *mut bool,
) -> FavStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let cfg =
            QuadratureConfig { grid_size: grid, refinement_limit: refinements, target_rel_error, enumeration_cap: DEFAULT_ENUMERATION_CAP };
        let r = favard_length(sys, n, &cfg)?;
        write(value, r.value, "value")?;
        write(error_estimate, r.error_estimate, "error_estimate")?;
        write(converged, r.converged, "converged")
    })
}

/// Monte Carlo estimate; identical for identical `seed` and `trials`.
///
/// # Safety
/// `sys` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_buffon_estimate(
    sys: *const FavSystem,
    n: usize,
    trials: u64,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
) -> FavStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        sys.checked_piece_count(n, DEFAULT_ENUMERATION_CAP)?;
        let r = buffon_estimate(sys, n, trials, seed)?;
        write(estimate, r.estimate, "estimate")?;
        write(std_error, r.stderr, "std_error")
    })
}

/// Multiplicity function of the depth-`n` projection at angle `theta`, or with
/// `maximal` set, its pointwise maximum over depths `0..=n`.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_multiplicity(
    sys: *const FavSystem,
    n: usize,
    theta: f64,
    maximal: bool,
    out: *mut *mut FavStepFunction,
) -> FavStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let f = if maximal {
            maximal_profile_with_cap(sys, n, theta, DEFAULT_ENUMERATION_CAP)?.0
        } else {
            multiplicity_with_cap(sys, n, theta, DEFAULT_ENUMERATION_CAP)?
        };
        write(out, Box::into_raw(Box::new(FavStepFunction(f))), "out")
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn fav_step_free(f: *mut FavStepFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of cells (maximal intervals of constant value, zero cells between pieces included).
///
/// # Safety
/// `f` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_step_cell_count(f: *const FavStepFunction, count: *mut usize) -> FavStatus {
    guard(|| write(count, handle(f, "f")?.0.values().len(), "count"))
}

/// Cell `index` as `[lo, hi)` with its value.
///
/// # Safety
/// `f` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_step_cell(f: *const FavStepFunction, index: usize, lo: *mut f64, hi: *mut f64, value: *mut u32) -> FavStatus {
    guard(|| {
        let (a, b, v) = handle(f, "f")?
            .0
            .cells()
            .nth(index)
            .ok_or_else(|| FavStatusError(FavStatus::InvalidInput, format!("cell index {index} out of range")))?;
        write(lo, a, "lo")?;
        write(hi, b, "hi")?;
        write(value, v, "value")
    })
}

/// Integral, support measure, `|{f >= k}|` for the given `k`, and `∫ f²`.
///
/// # Safety
/// `f` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_step_stats(
    f: *const FavStepFunction,
    k: u32,
    mass: *mut f64,
    support: *mut f64,
    level: *mut f64,
    l2: *mut f64,
) -> FavStatus {
    guard(|| {
        let f = &handle(f, "f")?.0;
        write(mass, f.mass(), "mass")?;
        write(support, f.support_measure(), "support")?;
        write(level, f.level_measure(k), "level")?;
        write(l2, f.l2_norm_sq(), "l2")
    })
}

/// Fourier transform of the depth-`n` projected measure at frequency `x`.
///
/// # Safety
/// `sys` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fav_nu_hat(sys: *const FavSystem, theta: f64, n: usize, x: f64, re: *mut f64, im: *mut f64) -> FavStatus {
    guard(|| {
        let v = nu_hat_eval(&handle(sys, "sys")?.0, Direction::Theta(theta), n, x)?;
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gasket() -> *mut FavSystem {
        let mut sys = ptr::null_mut();
        let status = unsafe { fav_system_preset(c"gasket".as_ptr(), &mut sys) };
        assert_eq!(status, FavStatus::Ok);
        sys
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(fav_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn preset_and_info() {
        let sys = gasket();
        let (mut maps, mut ratio) = (0, 0.0);
        assert_eq!(unsafe { fav_system_info(sys, &mut maps, &mut ratio) }, FavStatus::Ok);
        assert_eq!((maps, ratio), (3, 1.0 / 3.0));
        unsafe { fav_system_free(sys) };
    }

    #[test]
    fn error_codes_and_messages() {
        let mut sys = ptr::null_mut();
        assert_eq!(unsafe { fav_system_preset(c"bogus".as_ptr(), &mut sys) }, FavStatus::UnknownPreset);
        assert!(sys.is_null());
        assert!(last_error().contains("bogus"));
        assert_eq!(unsafe { fav_system_preset(ptr::null(), &mut sys) }, FavStatus::NullPointer);
        assert_eq!(unsafe { fav_system_from_json(c"{".as_ptr(), &mut sys) }, FavStatus::Parse);
        let (mut m, mut r) = (0, 0.0);
        assert_eq!(unsafe { fav_system_info(ptr::null(), &mut m, &mut r) }, FavStatus::NullPointer);

        let g = gasket();
        let (mut e, mut s) = (0.0, 0.0);
        assert_eq!(unsafe { fav_buffon_estimate(g, 40, 10, 1, &mut e, &mut s) }, FavStatus::CapExceeded);
        unsafe { fav_system_free(g) };
    }

    #[test]
    fn favard_identity_case() {
        let sys = gasket();
        let (mut v, mut e, mut c) = (0.0, 0.0, false);
        assert_eq!(unsafe { fav_favard_length(sys, 0, 64, 6, 1e-4, &mut v, &mut e, &mut c) }, FavStatus::Ok);
        assert!((v - 2.0).abs() < 1e-9 && c);
        assert_eq!(unsafe { fav_favard_length(sys, 0, 2, 6, 1e-4, &mut v, &mut e, &mut c) }, FavStatus::InvalidInput);
        unsafe { fav_system_free(sys) };
    }

    #[test]
    fn multiplicity_cells_and_stats() {
        let sys = gasket();
        let mut f = ptr::null_mut();
        assert_eq!(unsafe { fav_multiplicity(sys, 1, 0.0, false, &mut f) }, FavStatus::Ok);
        let mut count = 0;
        assert_eq!(unsafe { fav_step_cell_count(f, &mut count) }, FavStatus::Ok);
        let values: Vec<u32> = (0..count)
            .map(|i| {
                let (mut lo, mut hi, mut v) = (0.0, 0.0, 0);
                assert_eq!(unsafe { fav_step_cell(f, i, &mut lo, &mut hi, &mut v) }, FavStatus::Ok);
                assert!(lo < hi);
                v
            })
            .collect();
        assert_eq!(values, [1, 2, 3, 2, 1]);
        let (mut lo, mut hi, mut v) = (0.0, 0.0, 0);
        assert_eq!(unsafe { fav_step_cell(f, count, &mut lo, &mut hi, &mut v) }, FavStatus::InvalidInput);
        let (mut mass, mut support, mut level, mut l2) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(unsafe { fav_step_stats(f, 3, &mut mass, &mut support, &mut level, &mut l2) }, FavStatus::Ok);
        assert!((mass - 2.0).abs() < 1e-12);
        assert!((level - (2.0 - 3f64.sqrt()) / 3.0).abs() < 1e-12);
        unsafe {
            fav_step_free(f);
            fav_system_free(sys);
        }
    }

    #[test]
    fn nu_hat_at_zero_is_one() {
        let sys = gasket();
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(unsafe { fav_nu_hat(sys, 0.3, 4, 0.0, &mut re, &mut im) }, FavStatus::Ok);
        assert_eq!((re, im), (1.0, 0.0));
        unsafe { fav_system_free(sys) };
    }

    #[test]
    fn free_accepts_null() {
        unsafe {
            fav_system_free(ptr::null_mut());
            fav_step_free(ptr::null_mut());
        }
    }
}
