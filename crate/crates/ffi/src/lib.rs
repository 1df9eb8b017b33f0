//! C ABI for the bigfree word checks.
//!
//! All functions are panic-safe. Words are passed around as opaque `BfWord`
//! handles created by [`bf_word_parse`] and released by [`bf_word_free`].
//! Status-returning functions use non-negative codes for verdicts
//! (`BF_VERIFIED`, `BF_REFUTED`, `BF_UNKNOWN`) and negative codes for errors;
//! [`bf_last_error`] returns a message for the most recent failure on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bigfree::dsl;
use bigfree::sym::{self, Status};
use bigfree::word::TransfiniteWord;
use bigfree::Error;

/// Property holds for every point.
pub const BF_VERIFIED: i32 = 0;
/// Property fails; a witness exists.
pub const BF_REFUTED: i32 = 1;
/// The analysis was inconclusive within the budget.
pub const BF_UNKNOWN: i32 = 2;
/// Generic error; see `bf_last_error`.
pub const BF_ERR: i32 = -1;
/// A required pointer argument was null.
pub const BF_ERR_NULL: i32 = -2;
/// The computation budget was exhausted.
pub const BF_ERR_BUDGET: i32 = -3;

/// Opaque handle to a parsed word.
pub struct BfWord {
    inner: TransfiniteWord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn error_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExhausted { .. } => BF_ERR_BUDGET,
        _ => BF_ERR,
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Verified => BF_VERIFIED,
        Status::Refuted => BF_REFUTED,
        Status::Unknown => BF_UNKNOWN,
    }
}

fn guarded(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            BF_ERR
        }
    }
}

unsafe fn word_ref<'a>(word: *const BfWord) -> Option<&'a TransfiniteWord> {
    if word.is_null() {
        set_error("null word handle");
        None
    } else {
        Some(&(*word).inner)
    }
}

/// Parses a word from its textual form.
///
/// Returns null on failure; call `bf_last_error` for the message. The handle
/// must be released with `bf_word_free`.
#[no_mangle]
pub unsafe extern "C" fn bf_word_parse(text: *const c_char) -> *mut BfWord {
    let result = catch_unwind(AssertUnwindSafe(|| {
        if text.is_null() {
            set_error("null text");
            return ptr::null_mut();
        }
        let text = match CStr::from_ptr(text).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("text is not valid UTF-8");
                return ptr::null_mut();
            }
        };
        match dsl::parse_word(text) {
            Ok(inner) => Box::into_raw(Box::new(BfWord { inner })),
            Err(err) => {
                set_error(&err.to_string());
                ptr::null_mut()
            }
        }
    }));
    match result {
        Ok(p) => p,
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

/// Releases a word handle. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_word_free(word: *mut BfWord) {
    if !word.is_null() {
        drop(Box::from_raw(word));
    }
}

/// Renders a word back to its textual form.
///
/// Returns a heap string that must be released with `bf_string_free`, or null
/// if the handle is null.
#[no_mangle]
pub unsafe extern "C" fn bf_word_print(word: *const BfWord) -> *mut c_char {
    let result = catch_unwind(AssertUnwindSafe(|| match word_ref(word) {
        Some(w) => CString::new(dsl::print_word(w).replace('\0', ""))
            .unwrap()
            .into_raw(),
        None => ptr::null_mut(),
    }));
    result.unwrap_or(ptr::null_mut())
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Checks admissibility of a transposition word.
///
/// With `prime` zero the two-sided finite-chain condition is checked; with
/// `prime` nonzero the stricter one-sided variant is checked. Test points
/// are sampled from [-10, 10]. Returns `BF_VERIFIED`, `BF_REFUTED`,
/// `BF_UNKNOWN`, or a negative error code.
#[no_mangle]
pub unsafe extern "C" fn bf_check_sigma(word: *const BfWord, prime: i32, budget: u64) -> i32 {
    guarded(|| {
        let Some(w) = word_ref(word) else {
            return BF_ERR_NULL;
        };
        let points: Vec<i64> = (-10..=10).collect();
        let verdict = if prime != 0 {
            sym::membership_s_prime(w, &points, budget)
        } else {
            sym::membership_s(w, &points, budget)
        };
        match verdict {
            Ok(v) => status_code(v.status),
            Err(err) => {
                set_error(&err.to_string());
                error_code(&err)
            }
        }
    })
}

/// Checks admissibility of a Nielsen word: bounded head occurrences and no
/// infinite forward chain in the word or its formal inverse.
///
/// Returns `BF_VERIFIED`, `BF_REFUTED`, `BF_UNKNOWN`, or a negative error
/// code.
#[no_mangle]
pub unsafe extern "C" fn bf_check_aut(word: *const BfWord) -> i32 {
    guarded(|| {
        let Some(w) = word_ref(word) else {
            return BF_ERR_NULL;
        };
        match bigfree::aut::s0s1_check(w) {
            Ok(adm) => status_code(adm.status),
            Err(err) => {
                set_error(&err.to_string());
                error_code(&err)
            }
        }
    })
}

/// Evaluates the permutation realized by a transposition word at one point,
/// writing the image to `out`.
///
/// Returns `BF_VERIFIED` on success or a negative error code.
#[no_mangle]
pub unsafe extern "C" fn bf_eval_perm_point(
    word: *const BfWord,
    point: i64,
    budget: u64,
    out: *mut i64,
) -> i32 {
    guarded(|| {
        let Some(w) = word_ref(word) else {
            return BF_ERR_NULL;
        };
        if out.is_null() {
            set_error("null output pointer");
            return BF_ERR_NULL;
        }
        let perm = match sym::eval_p(w, budget) {
            Ok(p) => p,
            Err(err) => {
                set_error(&err.to_string());
                return error_code(&err);
            }
        };
        match perm.apply(point) {
            Ok(image) => {
                *out = image;
                BF_VERIFIED
            }
            Err(err) => {
                set_error(&err.to_string());
                error_code(&err)
            }
        }
    })
}

/// Returns the message for the most recent failure on this thread.
///
/// The pointer stays valid until the next failing call on the same thread.
/// Returns an empty string if no failure has occurred.
#[no_mangle]
pub extern "C" fn bf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
