use std::ffi::{CStr, CString};

use bigfree_ffi::*;

const ZETA_SHIFT: &str = "prod n = -inf to inf { T(-n, -n+1) }";
const NIELSEN_OK: &str = "prod n = 1 to inf { E(n+1, n) }";
const NIELSEN_BAD: &str = "prod n = 1 to inf { E(n, n+1) }";

fn parse(text: &str) -> *mut BfWord {
    let c = CString::new(text).unwrap();
    let w = unsafe { bf_word_parse(c.as_ptr()) };
    assert!(!w.is_null(), "parse failed for {text:?}");
    w
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bf_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn parse_print_roundtrip() {
    let w = parse(ZETA_SHIFT);
    let printed = unsafe { bf_word_print(w) };
    assert!(!printed.is_null());
    let text = unsafe { CStr::from_ptr(printed) }.to_str().unwrap().to_string();
    unsafe { bf_string_free(printed) };
    let w2 = parse(&text);
    unsafe {
        bf_word_free(w);
        bf_word_free(w2);
    }
}

#[test]
fn parse_failure_sets_error() {
    let c = CString::new("prod n = 0 to inf { E(n, n) }").unwrap();
    let w = unsafe { bf_word_parse(c.as_ptr()) };
    assert!(w.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn sigma_checks() {
    let w = parse(ZETA_SHIFT);
    assert_eq!(unsafe { bf_check_sigma(w, 0, 10_000) }, BF_VERIFIED);
    assert_eq!(unsafe { bf_check_sigma(w, 1, 10_000) }, BF_REFUTED);
    unsafe { bf_word_free(w) };
}

#[test]
fn sigma_exhausted_budget_is_inconclusive() {
    let w = parse(ZETA_SHIFT);
    assert_eq!(unsafe { bf_check_sigma(w, 0, 1) }, BF_UNKNOWN);
    unsafe { bf_word_free(w) };
}

#[test]
fn aut_checks() {
    let ok = parse(NIELSEN_OK);
    let bad = parse(NIELSEN_BAD);
    assert_eq!(unsafe { bf_check_aut(ok) }, BF_VERIFIED);
    assert_eq!(unsafe { bf_check_aut(bad) }, BF_REFUTED);
    unsafe {
        bf_word_free(ok);
        bf_word_free(bad);
    }
}

#[test]
fn eval_perm_point_shifts() {
    let w = parse(ZETA_SHIFT);
    for x in -5..=5 {
        let mut out = 0i64;
        assert_eq!(unsafe { bf_eval_perm_point(w, x, 10_000, &mut out) }, BF_VERIFIED);
        assert_eq!(out, x + 1);
    }
    unsafe { bf_word_free(w) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = 0i64;
    unsafe {
        assert!(bf_word_parse(std::ptr::null()).is_null());
        assert_eq!(bf_check_sigma(std::ptr::null(), 0, 100), BF_ERR_NULL);
        assert_eq!(bf_check_aut(std::ptr::null()), BF_ERR_NULL);
        assert_eq!(
            bf_eval_perm_point(std::ptr::null(), 0, 100, &mut out),
            BF_ERR_NULL
        );
        assert!(bf_word_print(std::ptr::null()).is_null());
        bf_word_free(std::ptr::null_mut());
        bf_string_free(std::ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/bigfree.h");
    let text = std::fs::read_to_string(header).expect("header missing");
    for symbol in [
        "bf_word_parse",
        "bf_word_free",
        "bf_word_print",
        "bf_string_free",
        "bf_check_sigma",
        "bf_check_aut",
        "bf_eval_perm_point",
        "bf_last_error",
        "BF_VERIFIED",
        "BfWord",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
