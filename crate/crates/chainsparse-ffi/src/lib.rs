//! C ABI for the chainsparse library: opaque handles, integer status codes,
//! and a thread-local last-error message. The matching header lives at
//! `include/chainsparse.h` and is kept in sync by hand (a test checks that
//! every exported symbol appears there).
//!
//! Conventions: every fallible function returns a `ChsStatus`; outputs go
//! through pointer parameters; every object returned through a `*mut ChsX`
//! out parameter must be released with the matching `chs_*_free`. Strings
//! returned by the library are UTF-8, NUL-terminated, and freed with
//! `chs_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};

use chainsparse::chain;
use chainsparse::code::{Code, WeightVector};
use chainsparse::density::{self, SearchMode};
use chainsparse::error::Error;
use chainsparse::sparsify::{sparsify_unweighted, SparsifyParams};
use chainsparse::verify::verify_sparsifier;
use chainsparse::weighted;

/// Status codes mirroring the CLI exit conventions.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChsStatus {
    ChsOk = 0,
    ChsVerifyFail = 1,
    ChsInvalidInput = 2,
    ChsBudgetExhausted = 3,
    ChsNullPointer = 4,
    ChsInternal = 5,
}

pub struct ChsCode(Code);
pub struct ChsWeights(WeightVector);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap());
}

fn status_of(err: &Error) -> ChsStatus {
    match err {
        Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => ChsStatus::ChsInvalidInput,
        Error::Inexact { .. } | Error::AttemptsExhausted { .. } | Error::Stagnation(_) => {
            ChsStatus::ChsBudgetExhausted
        }
        Error::CertificateViolation(_) => ChsStatus::ChsVerifyFail,
    }
}

fn fail(err: &Error) -> ChsStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Message for the most recent error on this thread. Valid until the next
/// failing call; do not free.
#[no_mangle]
pub extern "C" fn chs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn parse_utf8<'a>(ptr: *const c_char) -> Result<&'a str, ChsStatus> {
    if ptr.is_null() {
        set_error("null pointer");
        return Err(ChsStatus::ChsNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        ChsStatus::ChsInvalidInput
    })
}

/// Parse a code from its JSON form {"m": int, "words": ["0101", ...]}.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_code_parse_json(
    json: *const c_char,
    out: *mut *mut ChsCode,
) -> ChsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return ChsStatus::ChsNullPointer;
    }
    let text = match parse_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match Code::from_json(text) {
        Ok(code) => {
            *out = Box::into_raw(Box::new(ChsCode(code)));
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// # Safety
/// `code` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chs_code_free(code: *mut ChsCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// # Safety
/// `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chs_code_m(code: *const ChsCode) -> c_int {
    if code.is_null() {
        return -1;
    }
    (*code).0.m() as c_int
}

/// # Safety
/// `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chs_code_word_count(code: *const ChsCode) -> c_int {
    if code.is_null() {
        return -1;
    }
    (*code).0.word_count() as c_int
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_weights_parse_json(
    json: *const c_char,
    out: *mut *mut ChsWeights,
) -> ChsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return ChsStatus::ChsNullPointer;
    }
    let text = match parse_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match WeightVector::from_json(text) {
        Ok(w) => {
            *out = Box::into_raw(Box::new(ChsWeights(w)));
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Serialize weights to JSON; the returned string is freed with
/// `chs_string_free`.
///
/// # Safety
/// `weights` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_weights_to_json(
    weights: *const ChsWeights,
    out: *mut *mut c_char,
) -> ChsStatus {
    if weights.is_null() || out.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    let json = (*weights).0.to_json();
    match CString::new(json) {
        Ok(s) => {
            *out = s.into_raw();
            ChsStatus::ChsOk
        }
        Err(_) => {
            set_error("serialization produced interior NUL");
            ChsStatus::ChsInternal
        }
    }
}

/// # Safety
/// `weights` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn chs_weights_free(weights: *mut ChsWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// # Safety
/// `weights` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chs_weights_support_size(weights: *const ChsWeights) -> c_int {
    if weights.is_null() {
        return -1;
    }
    (*weights).0.support_size() as c_int
}

/// Exact chain length under the given node budget.
///
/// # Safety
/// `code` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_chain_length(
    code: *const ChsCode,
    budget: u64,
    out_value: *mut c_int,
) -> ChsStatus {
    if code.is_null() || out_value.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    match chain::chain_length_exact(&(*code).0, budget) {
        Ok((v, _)) => {
            *out_value = v as c_int;
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Exact non-redundancy under the given node budget.
///
/// # Safety
/// `code` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_nrd(
    code: *const ChsCode,
    budget: u64,
    out_value: *mut c_int,
) -> ChsStatus {
    if code.is_null() || out_value.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    match chain::nrd_exact(&(*code).0, budget) {
        Ok((v, _)) => {
            *out_value = v as c_int;
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Exact code density (at most 20 nonzero words).
///
/// # Safety
/// `code` must be a live handle and `out_phi` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_density_exact(
    code: *const ChsCode,
    out_phi: *mut c_double,
) -> ChsStatus {
    if code.is_null() || out_phi.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    match density::density(&(*code).0, SearchMode::Exact) {
        Ok(r) => {
            *out_phi = r.phi;
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

fn params_from(mode: c_int, epsilon: f64, seed: u64, cl_bound: i64) -> SparsifyParams {
    let mut p = if mode == 0 {
        SparsifyParams::theory(epsilon, seed)
    } else {
        SparsifyParams::practical(epsilon, seed)
    };
    if cl_bound >= 0 {
        p.cl_bound = Some(cl_bound as usize);
    }
    p
}

/// Sparsify an unweighted code. `mode` is 0 for theory constants, 1 for
/// practical; `cl_bound < 0` means "not supplied".
///
/// # Safety
/// `code` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_sparsify(
    code: *const ChsCode,
    epsilon: c_double,
    mode: c_int,
    seed: u64,
    cl_bound: i64,
    out: *mut *mut ChsWeights,
) -> ChsStatus {
    if code.is_null() || out.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    let params = params_from(mode, epsilon, seed, cl_bound);
    match sparsify_unweighted(&(*code).0, &params) {
        Ok((w, _)) => {
            *out = Box::into_raw(Box::new(ChsWeights(w)));
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Sparsify a weighted code via the grouping reduction.
///
/// # Safety
/// `code` and `weights` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_sparsify_weighted(
    code: *const ChsCode,
    weights: *const ChsWeights,
    epsilon: c_double,
    mode: c_int,
    seed: u64,
    cl_bound: i64,
    out: *mut *mut ChsWeights,
) -> ChsStatus {
    if code.is_null() || weights.is_null() || out.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    let params = params_from(mode, epsilon, seed, cl_bound);
    match weighted::sparsify_weighted(&(*code).0, &(*weights).0, epsilon, &params) {
        Ok((w, _)) => {
            *out = Box::into_raw(Box::new(ChsWeights(w)));
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Dimension-free repeated sparsification; `q <= 0` selects the mode's
/// default constant.
///
/// # Safety
/// `code` and `weights` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chs_sparsify_dimension_free(
    code: *const ChsCode,
    weights: *const ChsWeights,
    epsilon: c_double,
    mode: c_int,
    seed: u64,
    cl_bound: i64,
    q: c_double,
    out: *mut *mut ChsWeights,
) -> ChsStatus {
    if code.is_null() || weights.is_null() || out.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    let params = params_from(mode, epsilon, seed, cl_bound);
    let q = if q > 0.0 {
        q
    } else {
        weighted::default_q(params.mode)
    };
    match weighted::sparsify_dimension_free(&(*code).0, &(*weights).0, epsilon, &params, q) {
        Ok((w, _)) => {
            *out = Box::into_raw(Box::new(ChsWeights(w)));
            ChsStatus::ChsOk
        }
        Err(e) => fail(&e),
    }
}

/// Check the sparsifier contract. `original` may be NULL for unit weights.
/// Returns `ChsOk` on pass, `ChsVerifyFail` on a clean fail; the maximum
/// relative deviation is written to `out_max_deviation` either way.
///
/// # Safety
/// Handles must be live; `out_max_deviation` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn chs_verify(
    code: *const ChsCode,
    original: *const ChsWeights,
    tilde: *const ChsWeights,
    epsilon: c_double,
    out_max_deviation: *mut c_double,
) -> ChsStatus {
    if code.is_null() || tilde.is_null() {
        set_error("null pointer");
        return ChsStatus::ChsNullPointer;
    }
    let ones;
    let w = if original.is_null() {
        ones = WeightVector::uniform((*code).0.m(), 1.0);
        &ones
    } else {
        &(*original).0
    };
    match verify_sparsifier(&(*code).0, w, &(*tilde).0, epsilon) {
        Ok(r) => {
            if !out_max_deviation.is_null() {
                *out_max_deviation = r.max_relative_error;
            }
            if r.pass {
                ChsStatus::ChsOk
            } else {
                set_error("sparsifier contract violated");
                ChsStatus::ChsVerifyFail
            }
        }
        Err(e) => fail(&e),
    }
}
