use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use randstop_ffi::*;

fn benchmark_params() -> RsMarketParams {
    RsMarketParams {
        strike: 100.0,
        rate: 0.05,
        dividend: 0.1,
        vol: 0.2,
        maturity: 3.0,
        num_dates: 9,
    }
}

fn market(spot: &[f64]) -> *mut RsMarket {
    let mut m = ptr::null_mut();
    let st = unsafe { rs_market_new(&benchmark_params(), spot.as_ptr(), spot.len(), &mut m) };
    assert_eq!(st, RsStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = rs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_fit_options() -> RsFitOptions {
    RsFitOptions {
        method: RS_METHOD_BACKWARD,
        link: RS_LINK_GUMBEL,
        degree: 2,
        train_paths: 2000,
        train_seed: 5,
        optimizer_seed: 6,
        step_size: 0.0,
        max_iters: 50,
        restarts: 0,
    }
}

#[test]
fn market_rejects_bad_volatility() {
    let mut params = benchmark_params();
    params.vol = -1.0;
    let spot = [100.0, 100.0];
    let mut m = ptr::null_mut();
    let st = unsafe { rs_market_new(&params, spot.as_ptr(), 2, &mut m) };
    assert_eq!(st, RsStatus::Config);
    assert!(m.is_null());
    assert!(last_error().contains("vol"));
}

#[test]
fn null_arguments_are_reported() {
    let mut m = ptr::null_mut();
    let st = unsafe { rs_market_new(ptr::null(), ptr::null(), 0, &mut m) };
    assert_eq!(st, RsStatus::NullPointer);
    assert!(last_error().contains("params"));

    let mut out = RsEstimate::default();
    let st = unsafe { rs_estimate(ptr::null(), ptr::null(), 10, 1, RS_MODE_EXPECTATION, &mut out) };
    assert_eq!(st, RsStatus::NullPointer);
}

#[test]
fn success_clears_last_error() {
    let mut m = ptr::null_mut();
    unsafe { rs_market_new(ptr::null(), ptr::null(), 0, &mut m) };
    assert!(!rs_last_error_message().is_null());
    let m = market(&[100.0]);
    assert!(rs_last_error_message().is_null());
    unsafe { rs_market_free(m) };
}

#[test]
fn fit_estimate_and_json_round_trip() {
    let m = market(&[90.0, 90.0]);
    let mut policy = ptr::null_mut();
    assert_eq!(unsafe { rs_fit(m, &small_fit_options(), &mut policy) }, RsStatus::Ok);

    let mut est = RsEstimate::default();
    let st = unsafe { rs_estimate(m, policy, 5000, 9, RS_MODE_EXPECTATION, &mut est) };
    assert_eq!(st, RsStatus::Ok);
    assert_eq!(est.num_paths, 5000);
    assert!(est.estimate > 0.0 && est.std_error > 0.0);
    assert!(est.ci_low < est.estimate && est.estimate < est.ci_high);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rs_policy_to_json(policy, &mut json) }, RsStatus::Ok);
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { rs_policy_from_json(json, &mut copy) }, RsStatus::Ok);

    let mut again = RsEstimate::default();
    unsafe { rs_estimate(m, copy, 5000, 9, RS_MODE_EXPECTATION, &mut again) };
    assert_eq!(est.estimate.to_bits(), again.estimate.to_bits());

    let state = [0.1, -0.2];
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(rs_policy_eval_h(policy, 3, state.as_ptr(), 2, 1.0, &mut a), RsStatus::Ok);
        assert_eq!(rs_policy_eval_h(copy, 3, state.as_ptr(), 2, 1.0, &mut b), RsStatus::Ok);
    }
    assert_eq!(a, b);
    assert!((0.0..=1.0).contains(&a));

    let mut last = 0.0;
    unsafe { rs_policy_eval_h(policy, 9, state.as_ptr(), 2, 3.0, &mut last) };
    assert_eq!(last, 1.0);

    unsafe {
        rs_string_free(json);
        rs_policy_free(copy);
        rs_policy_free(policy);
        rs_market_free(m);
    }
}

#[test]
fn eval_h_checks_dimensions() {
    let m = market(&[100.0, 100.0]);
    let mut policy = ptr::null_mut();
    unsafe { rs_fit(m, &small_fit_options(), &mut policy) };
    let state = [0.0; 3];
    let mut h = 0.0;
    let st = unsafe { rs_policy_eval_h(policy, 0, state.as_ptr(), 3, 0.0, &mut h) };
    assert_eq!(st, RsStatus::Argument);
    let st = unsafe { rs_policy_eval_h(policy, 10, state.as_ptr(), 2, 0.0, &mut h) };
    assert_eq!(st, RsStatus::Argument);
    unsafe {
        rs_policy_free(policy);
        rs_market_free(m);
    }
}

#[test]
fn invalid_codes_are_config_errors() {
    let m = market(&[100.0]);
    let mut opts = small_fit_options();
    opts.link = 7;
    let mut policy = ptr::null_mut();
    assert_eq!(unsafe { rs_fit(m, &opts, &mut policy) }, RsStatus::Config);
    assert!(last_error().contains("link"));

    opts = small_fit_options();
    opts.method = 9;
    assert_eq!(unsafe { rs_fit(m, &opts, &mut policy) }, RsStatus::Config);

    opts = small_fit_options();
    assert_eq!(unsafe { rs_fit(m, &opts, &mut policy) }, RsStatus::Ok);
    let mut est = RsEstimate::default();
    let st = unsafe { rs_estimate(m, policy, 100, 1, 42, &mut est) };
    assert_eq!(st, RsStatus::Config);
    unsafe {
        rs_policy_free(policy);
        rs_market_free(m);
    }
}

#[test]
fn malformed_policy_json_is_rejected() {
    let text = CString::new("{\"mode\": \"per_date\"}").unwrap();
    let mut policy = ptr::null_mut();
    let st = unsafe { rs_policy_from_json(text.as_ptr(), &mut policy) };
    assert_eq!(st, RsStatus::Config);
    assert!(policy.is_null());
}

#[test]
fn european_reference_matches_between_calls() {
    let m = market(&[100.0]);
    let (mut a, mut b) = (RsEstimate::default(), RsEstimate::default());
    unsafe {
        assert_eq!(rs_european_reference(m, 20_000, 3, &mut a), RsStatus::Ok);
        assert_eq!(rs_european_reference(m, 20_000, 3, &mut b), RsStatus::Ok);
        rs_market_free(m);
    }
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert!(a.estimate > 0.0);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        rs_market_free(ptr::null_mut());
        rs_policy_free(ptr::null_mut());
        rs_string_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(rs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/randstop.h")
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    for name in [
        "RS_STATUS_OK",
        "RS_STATUS_PANIC",
        "typedef struct RsMarket RsMarket",
        "typedef struct RsPolicy RsPolicy",
        "RsMarketParams",
        "RsFitOptions",
        "RsEstimate",
        "rs_market_new",
        "rs_market_free",
        "rs_fit",
        "rs_policy_to_json",
        "rs_policy_from_json",
        "rs_policy_eval_h",
        "rs_policy_free",
        "rs_string_free",
        "rs_estimate",
        "rs_european_reference",
        "rs_last_error_message",
        "RS_MODE_SAMPLED",
    ] {
        assert!(header.contains(name), "header is missing {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "randstop.h"

int main(void) {
    RsMarketParams p = {100.0, 0.05, 0.1, 0.2, 3.0, 9};
    double spot[2] = {100.0, 100.0};
    RsMarket *m = NULL;
    if (rs_market_new(&p, spot, 2, &m) != RS_STATUS_OK) return 1;
    RsEstimate e;
    if (rs_european_reference(m, 1000, 1, &e) != RS_STATUS_OK) return 2;
    p.vol = -1.0;
    RsMarket *bad = NULL;
    if (rs_market_new(&p, spot, 2, &bad) != RS_STATUS_CONFIG) return 3;
    if (rs_last_error_message() == NULL) return 4;
    rs_market_free(m);
    printf("%.6f\n", e.estimate);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(exe) = std::env::current_exe() else { return };
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("librandstop_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    let value: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(value > 0.0);
}
