//! C interface. Machines are opaque handles created by `pb_machine_*`
//! constructors and released with `pb_machine_free`. Every function returns
//! a `PbStatus`; on failure `pb_last_error` describes the problem for the
//! calling thread. Strings returned through out-parameters are owned by the
//! caller and released with `pb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use polyblind::catalog;
use polyblind::decide::{check_permutable, DecideError, PermutabilityOptions, PermutabilityVerdict};
use polyblind::forest::build_forest;
use polyblind::machines::MachineDoc;
use polyblind::{MachineKind, NestedMachine};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Overflow = 5,
    BudgetExceeded = 6,
    Panic = 7,
}

/// Opaque machine handle.
pub struct PbMachine {
    inner: NestedMachine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NUL bytes were removed"));
}

type Outcome = Result<(), (PbStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PbStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (PbStatus, String)> {
    if s.is_null() {
        return Err((PbStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (PbStatus::InvalidUtf8, e.to_string()))
}

unsafe fn machine<'a>(m: *const PbMachine) -> Result<&'a NestedMachine, (PbStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or((PbStatus::NullPointer, "null machine handle".into()))
}

fn out<T>(p: *mut T) -> Result<*mut T, (PbStatus, String)> {
    if p.is_null() {
        Err((PbStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(p)
    }
}

fn invalid(e: impl ToString) -> (PbStatus, String) {
    (PbStatus::Invalid, e.to_string())
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a machine from the built-in catalog (`nb_a`, `nb_ab`,
/// `nb_ab_blind`, `nb_ab_pebble`, `itpow2`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_machine` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_from_catalog(name: *const c_char, out_machine: *mut *mut PbMachine) -> PbStatus {
    guard(|| {
        let name = read_str(name)?;
        let slot = out(out_machine)?;
        let inner = catalog::by_name(name).ok_or_else(|| (PbStatus::Invalid, format!("unknown machine {name:?}")))?;
        *slot = Box::into_raw(Box::new(PbMachine { inner }));
        Ok(())
    })
}

/// Creates a machine from a JSON document with an inline morphism.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_machine` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_from_json(json: *const c_char, out_machine: *mut *mut PbMachine) -> PbStatus {
    guard(|| {
        let text = read_str(json)?;
        let slot = out(out_machine)?;
        let doc: MachineDoc = serde_json::from_str(text).map_err(|e| (PbStatus::Parse, e.to_string()))?;
        let inner = doc
            .build(&|name| Err(polyblind::machines::MachineError::InvalidDoc(format!("unknown morphism {name:?}"))))
            .map_err(invalid)?;
        *slot = Box::into_raw(Box::new(PbMachine { inner }));
        Ok(())
    })
}

/// Releases a machine. Null is ignored.
///
/// # Safety
/// `m` must come from a `pb_machine_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_free(m: *mut PbMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Nesting level `k` of the machine (0 for a null handle).
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_level(m: *const PbMachine) -> usize {
    m.as_ref().map_or(0, |m| m.inner.level())
}

/// 0 for marble, 1 for blind, 2 for pebble machines.
///
/// # Safety
/// `m` must be a live handle and `out_kind` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_kind(m: *const PbMachine, out_kind: *mut u32) -> PbStatus {
    guard(|| {
        let m = machine(m)?;
        *out(out_kind)? = match m.kind() {
            MachineKind::Marble => 0,
            MachineKind::Blind => 1,
            MachineKind::Pebble => 2,
        };
        Ok(())
    })
}

/// Evaluates the machine on a word spelled with the letter names of its
/// morphism. Values above `UINT64_MAX` give `PB_STATUS_OVERFLOW`.
///
/// # Safety
/// `m` must be a live handle, `word` a NUL-terminated string and `out_value`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_eval(m: *const PbMachine, word: *const c_char, out_value: *mut u64) -> PbStatus {
    guard(|| {
        let m = machine(m)?;
        let w = m.morphism().parse_word(read_str(word)?).map_err(invalid)?;
        let slot = out(out_value)?;
        let v = m.eval(&w).map_err(invalid)?;
        *slot = u64::try_from(v).map_err(|_| (PbStatus::Overflow, format!("{v} does not fit in 64 bits")))?;
        Ok(())
    })
}

/// Checks K-permutability of a marble machine; `out_permutable` receives
/// 1 or 0.
///
/// # Safety
/// `m` must be a live handle and `out_permutable` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_check_permutable(
    m: *const PbMachine,
    k_max_word: usize,
    budget: u64,
    out_permutable: *mut i32,
) -> PbStatus {
    guard(|| {
        let m = machine(m)?;
        let slot = out(out_permutable)?;
        let options = PermutabilityOptions { bound: k_max_word, budget: budget.into() };
        let verdict = check_permutable(m, options).map_err(|e| match e {
            DecideError::BudgetExceeded { .. } => (PbStatus::BudgetExceeded, e.to_string()),
            e => invalid(e),
        })?;
        *slot = i32::from(matches!(verdict, PermutabilityVerdict::Permutable(_)));
        Ok(())
    })
}

/// Bracketed minimal-height forest of a word over the machine's morphism.
///
/// # Safety
/// `m` must be a live handle, `word` a NUL-terminated string and
/// `out_forest` a valid pointer; release the result with `pb_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pb_machine_forest(
    m: *const PbMachine,
    word: *const c_char,
    out_forest: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        let m = machine(m)?;
        let w = m.morphism().parse_word(read_str(word)?).map_err(invalid)?;
        let slot = out(out_forest)?;
        let text = build_forest(m.morphism().clone(), &w).to_brackets();
        *slot = CString::new(text).map_err(invalid)?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
