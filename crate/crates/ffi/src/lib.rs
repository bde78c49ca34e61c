//! C ABI for the ncleap library.
//!
//! Conventions: opaque handles for stateful objects, integer error codes for
//! every fallible call, and JSON strings for structured results. Strings
//! returned through out-parameters are owned by the library and must be
//! released with [`ncleap_string_free`]; handles with [`ncleap_state_free`].

use libc::c_char;
use ncleap::algebra::Backend;
use ncleap::leapfrog::{self, LeapfrogState};
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};


/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NcleapStatus {
    NcleapOk = 0,
    NcleapErrNullArgument = 1,
    NcleapErrConfig = 2,
    NcleapErrDegenerate = 3,
    NcleapErrUtf8 = 4,
    NcleapErrJson = 5,
    NcleapErrPanic = 6,
}

/// Opaque leapfrog state handle.
pub struct NcleapState {
    inner: LeapfrogState,
}

fn backend_of(code: u32) -> Option<Backend> {
    match code {
        0 => Some(Backend::Rational),
        1 => Some(Backend::Float),
        2 => Some(Backend::Scalar),
        _ => None,
    }
}

fn guard<F: FnOnce() -> NcleapStatus>(f: F) -> NcleapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => NcleapStatus::NcleapErrPanic,
    }
}

fn export_string(s: String, out: *mut *mut c_char) -> NcleapStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            NcleapStatus::NcleapOk
        }
        Err(_) => NcleapStatus::NcleapErrUtf8,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ncleap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter of
/// this library, not yet freed; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ncleap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Create a deterministic random leapfrog state in general position.
/// `backend`: 0 = rational, 1 = float, 2 = scalar; `mode`: 0 = periodic,
/// 1 = windowed with half-width `w`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ncleap_state_random(
    seed: u64,
    backend: u32,
    d: usize,
    n: usize,
    mode: u32,
    w: usize,
    out: *mut *mut NcleapState,
) -> NcleapStatus {
    if out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    guard(|| {
        let Some(backend) = backend_of(backend) else {
            return NcleapStatus::NcleapErrConfig;
        };
        if d == 0 || d > 8 || (backend == Backend::Scalar && d != 1) {
            return NcleapStatus::NcleapErrConfig;
        }
        let state = match mode {
            0 => {
                if n < 3 {
                    return NcleapStatus::NcleapErrConfig;
                }
                leapfrog::random_periodic_state(seed, backend, d, n)
            }
            1 => {
                if n + 2 * w < 3 {
                    return NcleapStatus::NcleapErrConfig;
                }
                leapfrog::random_windowed_state(seed, backend, d, n, w)
            }
            _ => return NcleapStatus::NcleapErrConfig,
        };
        match state {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(NcleapState { inner })) };
                NcleapStatus::NcleapOk
            }
            Err(_) => NcleapStatus::NcleapErrDegenerate,
        }
    })
}

/// Apply one step of the map, producing a fresh handle.
///
/// # Safety
/// `state` must be a live handle from this library; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ncleap_state_step(
    state: *const NcleapState,
    out: *mut *mut NcleapState,
) -> NcleapStatus {
    if state.is_null() || out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    let state = unsafe { &*state };
    guard(|| match leapfrog::step_vertices(&state.inner) {
        Ok(next) => {
            unsafe { *out = Box::into_raw(Box::new(NcleapState { inner: next })) };
            NcleapStatus::NcleapOk
        }
        Err(_) => NcleapStatus::NcleapErrDegenerate,
    })
}

/// Serialize a state to its JSON record (matrix entries as exact fraction
/// strings).
///
/// # Safety
/// `state` must be a live handle; `out` a valid slot; free the result with
/// [`ncleap_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ncleap_state_to_json(
    state: *const NcleapState,
    layer: u64,
    out: *mut *mut c_char,
) -> NcleapStatus {
    if state.is_null() || out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    let state = unsafe { &*state };
    guard(|| export_string(state.inner.to_json(layer).to_string(), out))
}

/// Largest residual of the cross-ratio defining property along one step
/// (exactly zero on the rational backends).
///
/// # Safety
/// `state` must be a live handle; `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn ncleap_state_eq_k_residual(
    state: *const NcleapState,
    out: *mut f64,
) -> NcleapStatus {
    if state.is_null() || out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    let state = unsafe { &*state };
    guard(|| {
        let stepped = match leapfrog::step_vertices(&state.inner) {
            Ok(s) => s,
            Err(_) => return NcleapStatus::NcleapErrDegenerate,
        };
        match leapfrog::eq_k_residuals(&state.inner, &stepped) {
            Ok(rs) => {
                let worst = rs
                    .iter()
                    .map(|(_, r)| r.max_abs_f64())
                    .fold(0.0f64, f64::max);
                unsafe { *out = worst };
                NcleapStatus::NcleapOk
            }
            Err(_) => NcleapStatus::NcleapErrDegenerate,
        }
    })
}

/// Release a state handle.
///
/// # Safety
/// `state` must be a handle from this library, not yet freed; NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ncleap_state_free(state: *mut NcleapState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Run the symbolic bracket relation suite (N <= 4); the result is the JSON
/// relation report.
///
/// # Safety
/// `out` must be a valid slot; free the result with [`ncleap_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ncleap_run_brackets(
    n: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> NcleapStatus {
    if out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    if n == 0 || n > 4 {
        return NcleapStatus::NcleapErrConfig;
    }
    guard(|| match ncleap::ncnet::bracket_relation_suite(n, seed) {
        Ok(report) => export_string(report.to_json().to_string(), out),
        Err(_) => NcleapStatus::NcleapErrDegenerate,
    })
}

/// Conservation of the network invariants over `steps` applications of the
/// dynamics; the result reports the exact maximal drift.
///
/// # Safety
/// `out` must be a valid slot; free the result with [`ncleap_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ncleap_run_invariants(
    seed: u64,
    backend: u32,
    d: usize,
    n: usize,
    steps: usize,
    out: *mut *mut c_char,
) -> NcleapStatus {
    if out.is_null() {
        return NcleapStatus::NcleapErrNullArgument;
    }
    guard(|| {
        let Some(backend) = backend_of(backend) else {
            return NcleapStatus::NcleapErrConfig;
        };
        if backend == Backend::Float || n == 0 || d == 0 || (backend == Backend::Scalar && d != 1)
        {
            return NcleapStatus::NcleapErrConfig;
        }
        let net = ncleap::ncnet::NumericNetwork::random(seed, backend, d, n);
        let weights = match net.xy_weights() {
            Ok(w) => w,
            Err(_) => return NcleapStatus::NcleapErrDegenerate,
        };
        match ncleap::ncnet::invariants_conservation(&weights, steps, 2 * n) {
            Ok(report) => export_string(
                serde_json::to_string(&report).expect("serializable"),
                out,
            ),
            Err(_) => NcleapStatus::NcleapErrDegenerate,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    #[test]
    fn version_is_static() {
        let v = unsafe { CStr::from_ptr(ncleap_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn state_roundtrip_and_step() {
        let mut handle: *mut NcleapState = ptr::null_mut();
        let code = unsafe { ncleap_state_random(7, 0, 2, 5, 1, 3, &mut handle) };
        assert_eq!(code, NcleapStatus::NcleapOk);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { ncleap_state_to_json(handle, 0, &mut json) },
            NcleapStatus::NcleapOk
        );
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap();
        assert!(text.contains("\"backend\""));
        unsafe { ncleap_string_free(json) };
        let mut next: *mut NcleapState = ptr::null_mut();
        assert_eq!(
            unsafe { ncleap_state_step(handle, &mut next) },
            NcleapStatus::NcleapOk
        );
        let mut resid = f64::NAN;
        assert_eq!(
            unsafe { ncleap_state_eq_k_residual(handle, &mut resid) },
            NcleapStatus::NcleapOk
        );
        assert_eq!(resid, 0.0);
        unsafe {
            ncleap_state_free(next);
            ncleap_state_free(handle);
        }
    }

    #[test]
    fn config_errors() {
        let mut handle: *mut NcleapState = ptr::null_mut();
        // bad backend
        assert_eq!(
            unsafe { ncleap_state_random(1, 9, 2, 5, 1, 3, &mut handle) },
            NcleapStatus::NcleapErrConfig
        );
        // periodic N = 1
        assert_eq!(
            unsafe { ncleap_state_random(1, 0, 2, 1, 0, 0, &mut handle) },
            NcleapStatus::NcleapErrConfig
        );
        // null out
        assert_eq!(
            unsafe { ncleap_state_random(1, 0, 2, 5, 1, 3, ptr::null_mut()) },
            NcleapStatus::NcleapErrNullArgument
        );
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { ncleap_run_brackets(9, 1, &mut s) },
            NcleapStatus::NcleapErrConfig
        );
    }

    #[test]
    fn invariants_report() {
        let mut s: *mut c_char = ptr::null_mut();
        let code = unsafe { ncleap_run_invariants(5, 2, 1, 3, 4, &mut s) };
        assert_eq!(code, NcleapStatus::NcleapOk);
        let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(v["exact"], true);
        unsafe { ncleap_string_free(s) };
    }
}
