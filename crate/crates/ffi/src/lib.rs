//! C ABI over `utimage`.
//!
//! Polynomials live behind an opaque `UtiPoly` handle. Every fallible call
//! returns a status code (the same numbers as the command-line exit codes)
//! and writes its result through an out-pointer. Strings returned to the
//! caller are NUL-terminated UTF-8 and must be released with
//! [`utimage_string_free`]. After a failure, [`utimage_last_error_message`]
//! describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use utimage::cli::CliError;
use utimage::oracle::{verify, Observed, VerificationPlan};
use utimage::report::{classification_report, preimage_report, verification_report};
use utimage::{classify_image, parse_polynomial, preimage, FieldSpec, NcLinearPoly, UtMatrix};

/// Success.
pub const UTI_OK: i32 = 0;
/// Internal error or caught panic.
pub const UTI_INTERNAL: i32 = 1;
/// Bad input: syntax, field, null pointer, invalid UTF-8, malformed JSON.
pub const UTI_INPUT: i32 = 2;
/// The target matrix is not in the image.
pub const UTI_NOT_IN_IMAGE: i32 = 3;
/// The oracle found a counterexample (the report is still returned).
pub const UTI_COUNTEREXAMPLE: i32 = 4;
/// The oracle's work estimate exceeds the budget.
pub const UTI_BUDGET: i32 = 5;
/// The field is too small for the preimage construction.
pub const UTI_GUARD: i32 = 6;

/// Opaque polynomial handle.
pub struct UtiPoly {
    inner: NcLinearPoly,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: CliError) -> i32 {
    set_error(&e.message);
    e.code
}

fn input(msg: &str) -> CliError {
    CliError { code: UTI_INPUT, kind: "input_error", message: msg.to_string() }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CliError> {
    if p.is_null() {
        return Err(input(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| input(&format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const UtiPoly) -> Result<&'a NcLinearPoly, CliError> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| input("polynomial handle is null"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL").into_raw()
}

/// Runs `f`, converting errors and panics into status codes.
fn guarded<F: FnOnce() -> Result<i32, CliError>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic");
            UTI_INTERNAL
        }
    }
}

/// Parses `text` as a polynomial in `num_vars` variables over `field`
/// (`"q=<prime>"` or `"rational"`). On success `*out` owns a new handle.
///
/// # Safety
/// `text` and `field` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_poly_parse(
    text: *const c_char,
    num_vars: usize,
    field: *const c_char,
    out: *mut *mut UtiPoly,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return Err(input("out is null"));
        }
        *out = ptr::null_mut();
        let text = read_str(text, "text")?;
        let field: FieldSpec = read_str(field, "field")?.parse()?;
        let p = parse_polynomial(text, num_vars, field)?;
        *out = Box::into_raw(Box::new(UtiPoly { inner: p }));
        Ok(UTI_OK)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `poly` must come from [`utimage_poly_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn utimage_poly_free(poly: *mut UtiPoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

/// Writes `ord(p)` to `*out`.
///
/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_poly_order(poly: *const UtiPoly, out: *mut usize) -> i32 {
    guarded(|| {
        let p = handle(poly)?;
        if out.is_null() {
            return Err(input("out is null"));
        }
        let ord = p.order().map_err(utimage::EngineError::from)?;
        *out = ord.order;
        Ok(UTI_OK)
    })
}

/// Normal form of the polynomial as a new string.
///
/// # Safety
/// `poly` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_poly_to_string(poly: *const UtiPoly, out: *mut *mut c_char) -> i32 {
    guarded(|| {
        let p = handle(poly)?;
        if out.is_null() {
            return Err(input("out is null"));
        }
        *out = to_c_string(p.to_string());
        Ok(UTI_OK)
    })
}

/// Classification report of `p(UT_n)` as JSON.
///
/// # Safety
/// `poly` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_classify_json(poly: *const UtiPoly, n: usize, out_json: *mut *mut c_char) -> i32 {
    guarded(|| {
        let p = handle(poly)?;
        if out_json.is_null() {
            return Err(input("out_json is null"));
        }
        *out_json = ptr::null_mut();
        let c = classify_image(p, n)?;
        *out_json = to_c_string(classification_report(p, &c).to_string());
        Ok(UTI_OK)
    })
}

/// Preimage report for a target given as a JSON array of rows.
///
/// # Safety
/// `poly` must be a live handle; `target_json` a NUL-terminated string;
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_preimage_json(
    poly: *const UtiPoly,
    target_json: *const c_char,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let p = handle(poly)?;
        if out_json.is_null() {
            return Err(input("out_json is null"));
        }
        *out_json = ptr::null_mut();
        let text = read_str(target_json, "target_json")?;
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| input(&format!("target JSON: {e}")))?;
        let target = UtMatrix::from_json(p.field(), &value)?;
        let w = preimage(p, &target)?;
        *out_json = to_c_string(preimage_report(p, &w).to_string());
        Ok(UTI_OK)
    })
}

/// Runs the oracle on `p(UT_n)`. Returns [`UTI_COUNTEREXAMPLE`] (with the
/// report in `*out_json`) when the classification is refuted.
///
/// # Safety
/// `poly` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn utimage_verify_json(
    poly: *const UtiPoly,
    n: usize,
    seed: u64,
    budget: u64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let p = handle(poly)?;
        if out_json.is_null() {
            return Err(input("out_json is null"));
        }
        *out_json = ptr::null_mut();
        let plan = VerificationPlan { seed, budget, ..VerificationPlan::default() };
        let r = verify(p, n, &plan)?;
        *out_json = to_c_string(verification_report(p, n, &r).to_string());
        Ok(if r.observed == Observed::Counterexample { UTI_COUNTEREXAMPLE } else { UTI_OK })
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn utimage_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread (empty if none). Valid until
/// the next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn utimage_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
