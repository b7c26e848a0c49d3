use std::ffi::{c_char, CStr, CString};
use std::ptr;

use serde_json::Value;
use utimage_ffi::*;

fn parse(text: &str, m: usize, field: &str) -> (i32, *mut UtiPoly) {
    let (t, f) = (CString::new(text).unwrap(), CString::new(field).unwrap());
    let mut out = ptr::null_mut();
    let code = unsafe { utimage_poly_parse(t.as_ptr(), m, f.as_ptr(), &mut out) };
    (code, out)
}

fn take_json(p: *mut c_char) -> Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap();
    unsafe { utimage_string_free(p) };
    v
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(utimage_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn parse_order_and_print() {
    let (code, p) = parse("x1*x2 - x2*x1", 2, "q=5");
    assert_eq!(code, UTI_OK);
    let mut r = usize::MAX;
    assert_eq!(unsafe { utimage_poly_order(p, &mut r) }, UTI_OK);
    assert_eq!(r, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { utimage_poly_to_string(p, &mut s) }, UTI_OK);
    assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), "x1*x2 + 4*x2*x1");
    unsafe {
        utimage_string_free(s);
        utimage_poly_free(p);
    }
}

#[test]
fn parse_errors_set_message() {
    let (code, p) = parse("x1*x1", 1, "rational");
    assert_eq!(code, UTI_INPUT);
    assert!(p.is_null());
    assert!(last_error().contains("not linear"), "{}", last_error());
    let (code, _) = parse("x1", 1, "q=4");
    assert_eq!(code, UTI_INPUT);
    let mut out = ptr::null_mut();
    let code = unsafe { utimage_poly_parse(ptr::null(), 1, ptr::null(), &mut out) };
    assert_eq!(code, UTI_INPUT);
    assert_eq!(unsafe { utimage_poly_order(ptr::null(), ptr::null_mut()) }, UTI_INPUT);
}

#[test]
fn classify_preimage_verify() {
    let (_, p) = parse("(x1*x2 - x2*x1)*(x3*x4 - x4*x3)", 4, "q=2");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { utimage_classify_json(p, 3, &mut out) }, UTI_OK);
    let v = take_json(out);
    assert_eq!((v["order"].as_u64(), v["t"].as_i64()), (Some(2), Some(1)));
    assert_eq!(v["theorem_case"], "iv");

    let target = CString::new(r#"[["0","0","1"],["0","0","0"],["0","0","0"]]"#).unwrap();
    assert_eq!(unsafe { utimage_preimage_json(p, target.as_ptr(), &mut out) }, UTI_OK);
    assert_eq!(take_json(out)["residual_zero"], true);

    let identity = CString::new("[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
    assert_eq!(unsafe { utimage_preimage_json(p, identity.as_ptr(), &mut out) }, UTI_NOT_IN_IMAGE);
    assert!(out.is_null());

    assert_eq!(unsafe { utimage_verify_json(p, 2, 0, 1_000_000, &mut out) }, UTI_OK);
    assert_eq!(take_json(out)["observed"], "equal");
    assert_eq!(unsafe { utimage_verify_json(p, 4, 0, 10, &mut out) }, UTI_BUDGET);
    unsafe { utimage_poly_free(p) };
}

#[test]
fn guard_violation_is_reported() {
    let (_, p) = parse("(x1*x2 - x2*x1)*(x3*x4 - x4*x3)", 4, "q=3");
    let target = CString::new("[[0,0,0,0,1],[0,0,0,0,0],[0,0,0,0,0],[0,0,0,0,0],[0,0,0,0,0]]").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { utimage_preimage_json(p, target.as_ptr(), &mut out) }, UTI_GUARD);
    assert!(last_error().contains("field too small"));
    unsafe { utimage_poly_free(p) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/utimage.h")).unwrap();
    for name in [
        "typedef struct UtiPoly UtiPoly",
        "utimage_poly_parse",
        "utimage_poly_free",
        "utimage_poly_order",
        "utimage_classify_json",
        "utimage_preimage_json",
        "utimage_verify_json",
        "utimage_string_free",
        "utimage_last_error_message",
        "#define UTI_COUNTEREXAMPLE 4",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
