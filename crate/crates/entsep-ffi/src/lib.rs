//! C ABI for the `entsep` library.
//!
//! Conventions:
//! - every fallible call returns an [`entsep_status`] code and writes its
//!   result through out-pointers;
//! - states are opaque handles created by the `entsep_state_*`
//!   constructors and released with [`entsep_state_free`];
//! - strings returned through `char**` out-parameters are heap-allocated
//!   and must be released with [`entsep_string_free`];
//! - the last error message for the calling thread is available from
//!   [`entsep_last_error_message`] until the next failing call.
//!
//! The matching C header is maintained at `include/entsep.h`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use entsep::criteria::{self, ClassifyHints};
use entsep::distill;
use entsep::error::Error;
use entsep::matcore::{C64, CMatrix};
use entsep::rng::RngStream;
use entsep::states::{self, StateFamily};
use entsep::DensityMatrix;

/// Opaque density-matrix handle.
pub struct EntsepState {
    rho: DensityMatrix,
    family: Option<StateFamily>,
}

/// Status codes: 0 success, 2 invalid input, 3 domain precondition
/// failure, 4 numerical failure, 5 null pointer.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum entsep_status {
    ENTSEP_OK = 0,
    ENTSEP_ERR_INVALID_INPUT = 2,
    ENTSEP_ERR_PRECONDITION = 3,
    ENTSEP_ERR_NUMERICAL = 4,
    ENTSEP_ERR_NULL_POINTER = 5,
}

/// Classification labels mirrored as stable integers.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum entsep_class_label {
    ENTSEP_CLASS_SEPARABLE = 0,
    ENTSEP_CLASS_FREE_ENTANGLED = 1,
    ENTSEP_CLASS_PPT_ENTANGLED = 2,
    ENTSEP_CLASS_UNKNOWN = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let cstring = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> entsep_status {
    match err.exit_code() {
        2 => entsep_status::ENTSEP_ERR_INVALID_INPUT,
        3 => entsep_status::ENTSEP_ERR_PRECONDITION,
        _ => entsep_status::ENTSEP_ERR_NUMERICAL,
    }
}

fn guard<F: FnOnce() -> Result<(), entsep_status>>(f: F) -> entsep_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => entsep_status::ENTSEP_OK,
        Ok(Err(code)) => code,
        Err(_) => {
            set_last_error("internal panic");
            entsep_status::ENTSEP_ERR_NUMERICAL
        }
    }
}

fn fail(err: &Error) -> entsep_status {
    set_last_error(&err.to_string());
    status_of(err)
}

unsafe fn write_out<T>(ptr: *mut T, value: T) -> Result<(), entsep_status> {
    if ptr.is_null() {
        set_last_error("null out-pointer");
        return Err(entsep_status::ENTSEP_ERR_NULL_POINTER);
    }
    unsafe { ptr.write(value) };
    Ok(())
}

unsafe fn deref_state<'a>(ptr: *const EntsepState) -> Result<&'a EntsepState, entsep_status> {
    if ptr.is_null() {
        set_last_error("null state handle");
        return Err(entsep_status::ENTSEP_ERR_NULL_POINTER);
    }
    Ok(unsafe { &*ptr })
}

/// Library version as a static string; never freed.
#[no_mangle]
pub extern "C" fn entsep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error message for this thread, or NULL; valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn entsep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Build a state from a JSON family spec, e.g.
/// `{"family":"stormer","alpha":3.5}`.
///
/// # Safety
/// `spec_json` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn entsep_state_from_spec_json(
    spec_json: *const c_char,
    out: *mut *mut EntsepState,
) -> entsep_status {
    guard(|| {
        if spec_json.is_null() {
            set_last_error("null spec string");
            return Err(entsep_status::ENTSEP_ERR_NULL_POINTER);
        }
        let text = unsafe { CStr::from_ptr(spec_json) }
            .to_str()
            .map_err(|_| {
                set_last_error("spec is not valid UTF-8");
                entsep_status::ENTSEP_ERR_INVALID_INPUT
            })?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            set_last_error(&format!("bad family spec: {e}"));
            entsep_status::ENTSEP_ERR_INVALID_INPUT
        })?;
        let spec: StateFamily = entsep::report::parse_family_strict(&value).map_err(|e| fail(&e))?;
        let rho = states::make(&spec).map_err(|e| fail(&e))?;
        let handle = Box::new(EntsepState {
            rho,
            family: Some(spec),
        });
        unsafe { write_out(out, Box::into_raw(handle)) }
    })
}

/// Build a state from row-major interleaved [re, im] entries of an
/// n×n matrix, n = dim_a·dim_b, len = 2·n².
///
/// # Safety
/// `entries` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_state_from_matrix(
    dim_a: usize,
    dim_b: usize,
    entries: *const f64,
    len: usize,
    out: *mut *mut EntsepState,
) -> entsep_status {
    guard(|| {
        if entries.is_null() {
            set_last_error("null entries pointer");
            return Err(entsep_status::ENTSEP_ERR_NULL_POINTER);
        }
        let n = dim_a * dim_b;
        if len != 2 * n * n {
            set_last_error(&format!(
                "expected {} doubles for a {}x{} complex matrix, got {}",
                2 * n * n,
                n,
                n,
                len
            ));
            return Err(entsep_status::ENTSEP_ERR_INVALID_INPUT);
        }
        let slice = unsafe { std::slice::from_raw_parts(entries, len) };
        let mat = CMatrix::from_fn(n, n, |i, j| {
            let k = 2 * (i * n + j);
            C64::new(slice[k], slice[k + 1])
        });
        let rho = DensityMatrix::new(mat, dim_a, dim_b).map_err(|e| fail(&e))?;
        let handle = Box::new(EntsepState { rho, family: None });
        unsafe { write_out(out, Box::into_raw(handle)) }
    })
}

/// Release a state handle. NULL is accepted.
///
/// # Safety
/// `state` must have been produced by an `entsep_state_*` constructor and
/// not freed before.
#[no_mangle]
pub unsafe extern "C" fn entsep_state_free(state: *mut EntsepState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_state_dims(
    state: *const EntsepState,
    dim_a: *mut usize,
    dim_b: *mut usize,
) -> entsep_status {
    guard(|| {
        let handle = unsafe { deref_state(state) }?;
        unsafe { write_out(dim_a, handle.rho.dim_a()) }?;
        unsafe { write_out(dim_b, handle.rho.dim_b()) }
    })
}

/// Minimum eigenvalue of the partial transpose; negative beyond tolerance
/// means NPT (entangled).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_ppt_min_eigenvalue(
    state: *const EntsepState,
    out: *mut f64,
) -> entsep_status {
    guard(|| {
        let handle = unsafe { deref_state(state) }?;
        let min = entsep::matcore::min_pt_eigenvalue(&handle.rho).map_err(|e| fail(&e))?;
        unsafe { write_out(out, min) }
    })
}

/// Singlet fraction F = ⟨ψ₊|ρ|ψ₊⟩ (square bipartitions only).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_singlet_fraction(
    state: *const EntsepState,
    out: *mut f64,
) -> entsep_status {
    guard(|| {
        let handle = unsafe { deref_state(state) }?;
        let f = criteria::singlet_fraction(&handle.rho).map_err(|e| fail(&e))?;
        unsafe { write_out(out, f) }
    })
}

/// Classify the state; uses the construction family when the handle was
/// built from a spec. `projector_budget` controls the stochastic
/// distillability search for NPT states in higher dimensions.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_classify(
    state: *const EntsepState,
    seed: u64,
    projector_budget: usize,
    out: *mut entsep_class_label,
) -> entsep_status {
    guard(|| {
        let handle = unsafe { deref_state(state) }?;
        let mut hints = match &handle.family {
            Some(family) => ClassifyHints::with_family(family.clone()),
            None => ClassifyHints {
                try_canonical_qubit_projection: true,
                ..Default::default()
            },
        };
        hints.projector_search_budget = projector_budget;
        let mut rng = RngStream::from_seed(seed);
        let cls = criteria::classify(&handle.rho, &hints, &mut rng);
        let label = match cls.label {
            criteria::ClassLabel::Separable => entsep_class_label::ENTSEP_CLASS_SEPARABLE,
            criteria::ClassLabel::FreeEntangled => entsep_class_label::ENTSEP_CLASS_FREE_ENTANGLED,
            criteria::ClassLabel::PptEntangled => entsep_class_label::ENTSEP_CLASS_PPT_ENTANGLED,
            criteria::ClassLabel::Unknown => entsep_class_label::ENTSEP_CLASS_UNKNOWN,
        };
        unsafe { write_out(out, label) }
    })
}

/// Run the full criteria battery and return the JSON report envelope used
/// by the CLI. Free the string with `entsep_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_analyze_json(
    state: *const EntsepState,
    seed: u64,
    out_json: *mut *mut c_char,
) -> entsep_status {
    guard(|| {
        let handle = unsafe { deref_state(state) }?;
        let mut rng = RngStream::from_seed(seed);
        let rho = &handle.rho;
        let mut reports = vec![
            criteria::ppt_check(rho),
            criteria::reduction_check(rho),
            criteria::entropic_check(rho, criteria::EntropicOrder::S0),
            criteria::entropic_check(rho, criteria::EntropicOrder::S1),
            criteria::entropic_check(rho, criteria::EntropicOrder::S2),
            criteria::entropic_check(rho, criteria::EntropicOrder::SInf),
            criteria::rank_bound_check(rho),
            criteria::chsh_m(rho),
        ];
        reports.retain(|r| r.verdict != criteria::Verdict::NotApplicable);
        let hints = match &handle.family {
            Some(family) => ClassifyHints::with_family(family.clone()),
            None => ClassifyHints {
                try_canonical_qubit_projection: true,
                ..Default::default()
            },
        };
        let classification = criteria::classify(rho, &hints, &mut rng);
        let input = handle
            .family
            .as_ref()
            .and_then(|f| serde_json::to_value(f).ok())
            .unwrap_or(serde_json::Value::Null);
        let report = serde_json::json!({
            "dim_a": rho.dim_a(),
            "dim_b": rho.dim_b(),
            "criteria": reports,
            "singlet_fraction": criteria::singlet_fraction(rho).ok(),
            "classification": classification,
        });
        let envelope = entsep::report::Envelope::new(seed, input, report);
        let text = envelope.to_json_pretty().map_err(|e| fail(&e))?;
        let cstring = CString::new(text).map_err(|_| {
            set_last_error("report contained interior NUL");
            entsep_status::ENTSEP_ERR_NUMERICAL
        })?;
        unsafe { write_out(out_json, cstring.into_raw()) }
    })
}

/// Free a string returned by this library. NULL is accepted.
///
/// # Safety
/// `s` must come from an entsep function returning an allocated string.
#[no_mangle]
pub unsafe extern "C" fn entsep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// One BBPSSW recurrence step.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_bbpssw_step(
    f: f64,
    f_next: *mut f64,
    success_prob: *mut f64,
) -> entsep_status {
    guard(|| {
        if !(0.0..=1.0).contains(&f) {
            set_last_error("bbpssw requires 0 <= F <= 1");
            return Err(entsep_status::ENTSEP_ERR_INVALID_INPUT);
        }
        let step = distill::bbpssw_step(f);
        unsafe { write_out(f_next, step.f_next) }?;
        unsafe { write_out(success_prob, step.success_prob) }
    })
}

/// One activation recurrence step against σ_α target pairs.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_activation_step(
    f: f64,
    alpha: f64,
    f_next: *mut f64,
    success_prob: *mut f64,
) -> entsep_status {
    guard(|| {
        if !(0.0 < f && f < 1.0) || !(2.0..=5.0).contains(&alpha) {
            set_last_error("activation requires 0 < F < 1 and 2 <= alpha <= 5");
            return Err(entsep_status::ENTSEP_ERR_INVALID_INPUT);
        }
        let step = distill::activation_step(f, alpha);
        unsafe { write_out(f_next, step.f_next) }?;
        unsafe { write_out(success_prob, step.success_prob) }
    })
}

/// Optimal teleportation fidelity (F_max·d + 1)/(d + 1).
///
/// # Safety
/// Out-pointer must be valid.
#[no_mangle]
pub unsafe extern "C" fn entsep_teleportation_fidelity(
    f_max: f64,
    d: usize,
    out: *mut f64,
) -> entsep_status {
    guard(|| {
        if d < 2 || !(0.0..=1.0).contains(&f_max) {
            set_last_error("requires d >= 2 and 0 <= F_max <= 1");
            return Err(entsep_status::ENTSEP_ERR_INVALID_INPUT);
        }
        unsafe { write_out(out, distill::teleportation_fidelity(f_max, d)) }
    })
}
