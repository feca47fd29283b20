use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use ltl_workbench::family::simple_pair;
use ltl_workbench::mdp::{model_to_json, policy_to_json, FiniteMemoryPolicy};
use ltl_workbench_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ltl_last_error()) }.to_string_lossy().into_owned()
}

fn formula(text: &str, atoms: Option<&str>) -> *mut LtlFormula {
    let text = c(text);
    let atoms = atoms.map(c);
    let mut out = ptr::null_mut();
    let status = unsafe { ltl_formula_parse(text.as_ptr(), atoms.as_ref().map_or(ptr::null(), |a| a.as_ptr()), &mut out) };
    assert_eq!(status, LtlStatus::Ok, "{}", last_error());
    out
}

#[test]
fn classify_through_handles() {
    let f = formula("a & X a", None);
    let mut r = LtlClassification {
        guarantee: false,
        safety: false,
        finitary: false,
        horizon: 0,
    };
    assert_eq!(unsafe { ltl_formula_classify(f, &mut r) }, LtlStatus::Ok);
    assert!(r.guarantee && r.safety && r.finitary);
    assert_eq!(r.horizon, 2);
    unsafe { ltl_formula_free(f) };

    let g = formula("G F a", Some("a,b"));
    assert_eq!(unsafe { ltl_formula_classify(g, &mut r) }, LtlStatus::Ok);
    assert!(!r.guarantee && !r.safety && r.horizon == -1);
    unsafe { ltl_formula_free(g) };
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let bad = c("a &");
    assert_eq!(unsafe { ltl_formula_parse(bad.as_ptr(), ptr::null(), &mut out) }, LtlStatus::ParseError);
    assert!(out.is_null());
    assert!(last_error().contains("syntax"));
    let unknown = c("a & c");
    let atoms = c("a,b");
    assert_eq!(unsafe { ltl_formula_parse(unknown.as_ptr(), atoms.as_ptr(), &mut out) }, LtlStatus::ParseError);
    assert!(last_error().contains('c'));
    assert_eq!(unsafe { ltl_formula_parse(ptr::null(), ptr::null(), &mut out) }, LtlStatus::NullArgument);
    let mut model = ptr::null_mut();
    let junk = c("{\"states\": 3}");
    assert_eq!(unsafe { ltl_model_from_json(junk.as_ptr(), &mut model) }, LtlStatus::InvalidModel);
    assert_eq!(unsafe { ltl_optimal_value(ptr::null(), ptr::null(), ptr::null_mut(), ptr::null_mut()) }, LtlStatus::NullArgument);
    let ok = c("a");
    assert_eq!(unsafe { ltl_formula_parse(ok.as_ptr(), ptr::null(), &mut out) }, LtlStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { ltl_formula_free(out) };
    unsafe { ltl_formula_free(ptr::null_mut()) };
}

#[test]
fn values_match_the_library() {
    let pair = simple_pair(0.1).unwrap();
    let json = c(&model_to_json(&pair.m1, &pair.labeling));
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { ltl_model_from_json(json.as_ptr(), &mut model) }, LtlStatus::Ok);
    assert_eq!(unsafe { ltl_model_num_states(model) }, 3);
    let f = formula("F h", None);

    let mut best = 0.0;
    let mut certified = ptr::null_mut();
    assert_eq!(unsafe { ltl_optimal_value(model, f, &mut best, &mut certified) }, LtlStatus::Ok);
    assert!((best - 1.0).abs() < 1e-10);
    assert!(!certified.is_null());
    let mut v = 0.0;
    assert_eq!(unsafe { ltl_policy_value(model, f, certified, &mut v) }, LtlStatus::Ok);
    assert!((v - 1.0).abs() < 1e-10);

    let uniform = FiniteMemoryPolicy::uniform(2, 3, 2);
    let text = c(&policy_to_json(&uniform, &pair.m1));
    let mut pol = ptr::null_mut();
    assert_eq!(unsafe { ltl_policy_from_json(model, text.as_ptr(), &mut pol) }, LtlStatus::Ok);
    assert_eq!(unsafe { ltl_policy_value(model, f, pol, &mut v) }, LtlStatus::Ok);
    assert!((v - 0.5).abs() < 1e-10);

    unsafe {
        ltl_policy_free(pol);
        ltl_policy_free(certified);
        ltl_formula_free(f);
        ltl_model_free(model);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(ltl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/ltl_workbench.h");
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
