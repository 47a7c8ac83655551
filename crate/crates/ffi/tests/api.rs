use std::ffi::{CStr, CString};
use std::ptr;

use relent_ffi::*;

fn msg() -> String {
    let p = relent_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn state(re: &[f64]) -> *mut RelentState {
    let dim = (re.len() as f64).sqrt() as usize;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { relent_state_from_parts(dim, re.as_ptr(), ptr::null(), &mut s) }, RelentStatus::Ok);
    s
}

#[test]
fn entropy_by_every_method() {
    let p = state(&[0.5, 0.0, 0.0, 0.5]);
    let q = state(&[0.75, 0.0, 0.0, 0.25]);
    let expected = 0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2.0f64.ln();
    for m in [RelentMethod::Support, RelentMethod::Regularized, RelentMethod::Modular, RelentMethod::Form] {
        let mut v = 0.0;
        assert_eq!(unsafe { relent_relative_entropy(p, q, m, &mut v) }, RelentStatus::Ok);
        assert!((v - expected).abs() < 1e-7, "{m:?}: {v}");
    }
    let e0 = state(&[1.0, 0.0, 0.0, 0.0]);
    let e1 = state(&[0.0, 0.0, 0.0, 1.0]);
    let mut v = 0.0;
    assert_eq!(unsafe { relent_relative_entropy(e0, e1, RelentMethod::Support, &mut v) }, RelentStatus::Ok);
    assert_eq!(v, f64::INFINITY);
    for s in [p, q, e0, e1] {
        unsafe { relent_state_free(s) };
    }
}

#[test]
fn json_round_trip_and_parse_errors() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { relent_state_random(3, 2, 7, &mut s) }, RelentStatus::Ok);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { relent_state_to_json(s, &mut text) }, RelentStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { relent_state_from_json(text, &mut back) }, RelentStatus::Ok);
    let mut d = 0;
    assert_eq!(unsafe { relent_state_dim(back, &mut d) }, RelentStatus::Ok);
    assert_eq!(d, 3);
    unsafe {
        relent_string_free(text);
        relent_state_free(s);
        relent_state_free(back);
    }
    let bad = CString::new("{\"kind\": \"density\"").unwrap();
    assert_eq!(unsafe { relent_state_from_json(bad.as_ptr(), &mut back) }, RelentStatus::Parse);
    assert!(!msg().is_empty());
    assert_eq!(unsafe { relent_state_from_json(ptr::null(), &mut back) }, RelentStatus::NullPointer);
    let not_psd = [1.5, 0.0, 0.0, -0.5];
    assert_eq!(
        unsafe { relent_state_from_parts(2, not_psd.as_ptr(), ptr::null(), &mut back) },
        RelentStatus::InvalidState
    );
}

#[test]
fn dpi_and_both_chains() {
    let (mut r, mut s, mut ch) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(relent_state_random(4, 4, 1, &mut r), RelentStatus::Ok);
        assert_eq!(relent_state_random(4, 4, 2, &mut s), RelentStatus::Ok);
        assert_eq!(relent_channel_random(4, 2, 3, &mut ch), RelentStatus::Ok);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        assert_eq!(relent_dpi(r, s, ch, &mut lhs, &mut rhs), RelentStatus::Ok);
        assert!(lhs <= rhs + 1e-8);
        let (mut gp, mut gu) = (0.0, 0.0);
        let mut cert = ptr::null_mut();
        assert_eq!(relent_chain(r, s, 2, 2, RelentProof::Petz, &mut gp, &mut cert), RelentStatus::Ok);
        assert!(CStr::from_ptr(cert).to_str().unwrap().contains("instances"));
        relent_string_free(cert);
        assert_eq!(relent_chain(r, s, 2, 2, RelentProof::Uhlmann, &mut gu, ptr::null_mut()), RelentStatus::Ok);
        assert!((gp - gu).abs() < 1e-7);
        assert_eq!(relent_chain(r, s, 2, 3, RelentProof::Petz, &mut gp, ptr::null_mut()), RelentStatus::Dimension);
        relent_state_free(r);
        relent_state_free(s);
        relent_channel_free(ch);
    }
}

#[test]
fn figure_csv_and_campaign() {
    let grid = [1.0];
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(relent_figure_csv(RelentFigure::JensenInverse, 0.5, 0.5, grid.as_ptr(), 1, &mut out), RelentStatus::Ok);
        let csv = CStr::from_ptr(out).to_str().unwrap().to_owned();
        relent_string_free(out);
        assert!(csv.starts_with("x,lhs,rhs,violation\n"));
        assert!(csv.trim_end().ends_with("true"));
        assert_eq!(
            relent_figure_csv(RelentFigure::JensenLog, 0.5, 0.5, grid.as_ptr(), 0, &mut out),
            RelentStatus::InvalidArgument
        );

        let cfg = CString::new("checks = [\"dpi\"]\nsamples = 2\n").unwrap();
        let mut fails = usize::MAX;
        assert_eq!(relent_campaign_run(cfg.as_ptr(), 1, &mut out, &mut fails), RelentStatus::Ok);
        assert_eq!(fails, 0);
        assert!(CStr::from_ptr(out).to_str().unwrap().contains("\"total_fail\": 0"));
        relent_string_free(out);
        let bad = CString::new("checks = [\"nope\"]").unwrap();
        assert_eq!(relent_campaign_run(bad.as_ptr(), 0, &mut out, ptr::null_mut()), RelentStatus::InvalidArgument);
        assert!(msg().contains("nope"));
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        relent_state_free(ptr::null_mut());
        relent_channel_free(ptr::null_mut());
        relent_string_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(relent_version()) }.to_bytes().is_empty());
}
