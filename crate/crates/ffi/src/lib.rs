//! C interface to the workbench: formula parsing and classification, model
//! loading, and exact satisfaction probabilities.
//!
//! Every fallible function returns an [`LtlStatus`] and writes its result
//! through an out-pointer. After a failure, [`ltl_last_error`] returns a
//! message describing it; the message belongs to the calling thread and
//! stays valid until that thread's next call into this library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ltl_workbench::automata::{classify, Limits};
use ltl_workbench::ltl::{parse, parse_inferring_alphabet, Alphabet, Ltl};
use ltl_workbench::mdp::{load_model, load_policy, FiniteMemoryPolicy, Labeling, Mdp};
use ltl_workbench::probcheck::{optimal_value, policy_value};
use ltl_workbench::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidModel = 4,
    InvalidPolicy = 5,
    AutomatonTooLarge = 6,
    AlphabetMismatch = 7,
    Internal = 8,
}

/// A parsed formula with its alphabet.
pub struct LtlFormula(Ltl);

/// A labeled MDP.
pub struct LtlModel {
    mdp: Mdp,
    labeling: Labeling,
}

/// A finite-memory policy bound to the model it was loaded against.
pub struct LtlPolicy(FiniteMemoryPolicy);

/// Membership of a formula in the temporal hierarchy classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LtlClassification {
    pub guarantee: bool,
    pub safety: bool,
    pub finitary: bool,
    /// Decision horizon of a finitary formula, otherwise -1.
    pub horizon: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> LtlStatus {
    match e {
        Error::Syntax { .. } | Error::UnknownAtom(_) | Error::AlphabetTooLarge(_) | Error::DuplicateAtom(_) => {
            LtlStatus::ParseError
        }
        Error::AutomatonTooLarge { .. } => LtlStatus::AutomatonTooLarge,
        Error::AlphabetMismatch(_) => LtlStatus::AlphabetMismatch,
        Error::InvalidPolicy(_) => LtlStatus::InvalidPolicy,
        Error::InvalidModel(_) | Error::UnknownStateOrAction => LtlStatus::InvalidModel,
        _ => LtlStatus::Internal,
    }
}

struct Failure(LtlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LtlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            LtlStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LtlStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LtlStatus::NullArgument, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LtlStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live `T` created by this library.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` is null or writable.
unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `out` is null or writable.
unsafe fn store_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = value;
    Ok(())
}

/// Message of the last failure on this thread, or an empty string.
#[no_mangle]
pub extern "C" fn ltl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ltl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `text`. `atoms` is a comma-separated atom order, or null to use
/// the formula's atoms in sorted order.
///
/// # Safety
/// String arguments are null or NUL-terminated; `out` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_formula_parse(
    text: *const c_char,
    atoms: *const c_char,
    out: *mut *mut LtlFormula,
) -> LtlStatus {
    guard(|| {
        let source = c_str(text, "text")?;
        let f = if atoms.is_null() {
            parse_inferring_alphabet(source)?
        } else {
            let names = c_str(atoms, "atoms")?;
            let names: Vec<&str> = names.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            parse(source, &Alphabet::new(names)?)?
        };
        store(out, LtlFormula(f))
    })
}

/// # Safety
/// `f` is null or a formula from [`ltl_formula_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ltl_formula_free(f: *mut LtlFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` is null or a live formula; `out` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_formula_classify(f: *const LtlFormula, out: *mut LtlClassification) -> LtlStatus {
    guard(|| {
        let f = borrow(f, "formula")?;
        let r = classify(&f.0, &Limits::default())?;
        store_value(
            out,
            LtlClassification {
                guarantee: r.in_guarantee,
                safety: r.in_safety,
                finitary: r.in_finitary,
                horizon: r.horizon.map_or(-1, |h| h as i64),
            },
        )
    })
}

/// Loads a model from its JSON text.
///
/// # Safety
/// `json` is null or NUL-terminated; `out` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_model_from_json(json: *const c_char, out: *mut *mut LtlModel) -> LtlStatus {
    guard(|| {
        let (mdp, labeling) = load_model(c_str(json, "json")?)?;
        store(out, LtlModel { mdp, labeling })
    })
}

/// # Safety
/// `m` is null or a model from [`ltl_model_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ltl_model_free(m: *mut LtlModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of states of `m`, or 0 when `m` is null.
///
/// # Safety
/// `m` is null or a live model.
#[no_mangle]
pub unsafe extern "C" fn ltl_model_num_states(m: *const LtlModel) -> usize {
    m.as_ref().map_or(0, |m| m.mdp.num_states())
}

/// Loads a policy for `model` from its JSON text.
///
/// # Safety
/// `model` is null or live; `json` is null or NUL-terminated; `out` is null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_policy_from_json(
    model: *const LtlModel,
    json: *const c_char,
    out: *mut *mut LtlPolicy,
) -> LtlStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let pol = load_policy(c_str(json, "json")?, &m.mdp, &m.labeling)?;
        store(out, LtlPolicy(pol))
    })
}

/// # Safety
/// `p` is null or a policy from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ltl_policy_free(p: *mut LtlPolicy) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Maximal probability of satisfying `f` on `model`. When `policy_out` is
/// not null it receives a policy attaining the optimum.
///
/// # Safety
/// Handles are null or live; `value` is null or writable; `policy_out` is
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_optimal_value(
    model: *const LtlModel,
    f: *const LtlFormula,
    value: *mut f64,
    policy_out: *mut *mut LtlPolicy,
) -> LtlStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let f = borrow(f, "formula")?;
        let r = optimal_value(&m.mdp, &m.labeling, &f.0)?;
        store_value(value, r.value)?;
        match (policy_out.is_null(), r.policy) {
            (true, _) => Ok(()),
            (false, Some(pol)) => store(policy_out, LtlPolicy(pol)),
            (false, None) => {
                *policy_out = ptr::null_mut();
                Ok(())
            }
        }
    })
}

/// Probability that `policy` satisfies `f` on `model`.
///
/// # Safety
/// Handles are null or live and `policy` was loaded against `model`;
/// `value` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn ltl_policy_value(
    model: *const LtlModel,
    f: *const LtlFormula,
    policy: *const LtlPolicy,
    value: *mut f64,
) -> LtlStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let f = borrow(f, "formula")?;
        let pol = borrow(policy, "policy")?;
        let r = policy_value(&m.mdp, &m.labeling, &f.0, &pol.0)?;
        store_value(value, r.value)
    })
}
