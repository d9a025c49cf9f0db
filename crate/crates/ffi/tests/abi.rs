use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use v2v_offload_ffi::*;

const DEPARTURE: &str = include_str!("../../core/scenarios/departure.toml");

fn last_error() -> String {
    unsafe { CStr::from_ptr(vec_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn scenario(text: &str) -> *mut VecScenario {
    let toml = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { vec_scenario_from_toml(toml.as_ptr(), &mut h) }, VecStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn departure_example_through_handle() {
    let h = scenario(DEPARTURE);
    let hgsa = CString::new("hgsa").unwrap();
    let (mut n, mut m) = (0usize, 0usize);
    assert_eq!(unsafe { vec_scenario_counts(h, &mut n, &mut m) }, VecStatus::Ok);
    assert_eq!((n, m), (4, 4));
    let mut off = VecMetrics::default();
    let mut on = VecMetrics::default();
    assert_eq!(
        unsafe { vec_scenario_simulate(h, hgsa.as_ptr(), false, &mut off) },
        VecStatus::Ok
    );
    assert_eq!(
        unsafe { vec_scenario_simulate(h, hgsa.as_ptr(), true, &mut on) },
        VecStatus::Ok
    );
    assert_eq!((off.planned_makespan, off.makespan, off.reoffload_count), (5.0, 7.0, 1));
    assert_eq!((on.makespan, on.reoffload_count), (6.0, 0));
    unsafe { vec_scenario_free(h) };
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new("rng_seed = \"x\"").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { vec_scenario_from_toml(bad.as_ptr(), &mut h) },
        VecStatus::ConfigError
    );
    assert!(h.is_null());
    assert!(last_error().contains("rng_seed"), "{}", last_error());

    assert_eq!(
        unsafe { vec_scenario_from_toml(ptr::null(), &mut h) },
        VecStatus::NullArgument
    );

    let h = scenario(DEPARTURE);
    let nope = CString::new("nope").unwrap();
    let mut out = VecMetrics::default();
    assert_eq!(
        unsafe { vec_scenario_simulate(h, nope.as_ptr(), true, &mut out) },
        VecStatus::InvalidArgument
    );
    assert!(last_error().contains("nope"));
    unsafe { vec_scenario_free(h) };
    unsafe { vec_scenario_free(ptr::null_mut()) };
}

#[test]
fn bare_matrix_solve() {
    let costs = [5.0, 5.0, 3.0, 4.0].repeat(4);
    let brute = CString::new("brute").unwrap();
    let mut a = [usize::MAX; 4];
    let mut ms = 0.0;
    let st = unsafe {
        vec_solve_costs(
            costs.as_ptr(),
            4,
            4,
            ptr::null(),
            brute.as_ptr(),
            1,
            a.as_mut_ptr(),
            &mut ms,
        )
    };
    assert_eq!(st, VecStatus::Ok);
    assert_eq!(ms, 5.0);
    assert!(a.iter().all(|&j| j < 4));

    let stays = [f64::INFINITY, 1.0, 1.0, 1.0];
    let one = [f64::INFINITY, 2.0, 2.0, 2.0];
    let st = unsafe {
        vec_solve_costs(
            one.as_ptr(),
            1,
            4,
            stays.as_ptr(),
            brute.as_ptr(),
            1,
            a.as_mut_ptr(),
            &mut ms,
        )
    };
    assert_eq!(st, VecStatus::Infeasible);
    assert!(!last_error().is_empty());
}

#[test]
fn channel_functions() {
    let ch = vec_channel_default();
    let (mut r, mut d) = (0.0, 0.0);
    assert_eq!(unsafe { vec_direct_rate(ch, 2, &mut r) }, VecStatus::Ok);
    assert!((r - 87_957_228.712_136_73).abs() / r < 1e-9);
    assert_eq!(unsafe { vec_tran_delay(1e6, ch, 2, 1, &mut d) }, VecStatus::Ok);
    assert!((d - 1e6 / r).abs() / d < 1e-12);
    assert_eq!(
        unsafe { vec_tran_delay(1e6, ch, 2, 0, &mut d) },
        VecStatus::InvalidArgument
    );
    assert_eq!(unsafe { vec_direct_rate(ch, 0, &mut r) }, VecStatus::InvalidArgument);
}

#[test]
fn header_parses_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/v2v_offload.h");
    assert!(header.exists());
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99"])
        .arg(&header)
        .output()
    else {
        eprintln!("cc not available; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
