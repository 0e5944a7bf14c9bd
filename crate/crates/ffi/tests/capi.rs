use std::ffi::{CStr, CString};
use std::ptr;

use fedvi_ffi::*;

fn last_error() -> String {
    let p = fedvi_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn affine_operator_round_trip() {
    let a = [0.0, 1.0, -1.0, 0.0];
    let b = [0.5, -0.5];
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(
            fedvi_operator_affine(2, a.as_ptr(), b.as_ptr(), &mut op),
            FedviStatus::Ok
        );
        assert_eq!(fedvi_operator_dim(op), 2);
        let z = [1.0, 2.0];
        let mut v = [0.0; 2];
        assert_eq!(fedvi_operator_eval(op, z.as_ptr(), 2, v.as_mut_ptr()), FedviStatus::Ok);
        assert_eq!(v, [2.5, -1.5]);
        let mut l = 0.0;
        assert_eq!(fedvi_operator_lipschitz(op, &mut l), FedviStatus::Ok);
        assert!((l - 1.0).abs() < 1e-12);
        fedvi_operator_free(op);
    }
}

#[test]
fn skew_gap_closed_form() {
    let mut op = ptr::null_mut();
    unsafe {
        assert_eq!(
            fedvi_operator_from_problem(FedviProblemKind::Skew, 2, 0, ptr::null(), &mut op),
            FedviStatus::Ok
        );
        let x = [0.3, -0.4];
        let c = [0.0, 0.0];
        let (mut value, mut certified) = (0.0, false);
        assert_eq!(
            fedvi_restricted_gap(op, x.as_ptr(), c.as_ptr(), 2, 2.0, &mut value, &mut certified),
            FedviStatus::Ok
        );
        assert!(certified);
        assert!((value - 2.0 * 0.5).abs() < 1e-9, "{value}");
        fedvi_operator_free(op);
    }
}

#[test]
fn dimension_mismatch_and_null_pointers_report_status() {
    let mut op = ptr::null_mut();
    unsafe {
        let params = CString::new(r#"{"lipschitz": 2.0}"#).unwrap();
        assert_eq!(
            fedvi_operator_from_problem(FedviProblemKind::Affine, 3, 1, params.as_ptr(), &mut op),
            FedviStatus::Ok
        );
        let z = [1.0; 2];
        let mut v = [0.0; 2];
        assert_eq!(
            fedvi_operator_eval(op, z.as_ptr(), 2, v.as_mut_ptr()),
            FedviStatus::DimensionMismatch
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            fedvi_operator_eval(op, ptr::null(), 3, v.as_mut_ptr()),
            FedviStatus::NullPointer
        );
        assert_eq!(fedvi_operator_dim(ptr::null()), 0);
        fedvi_operator_free(op);
        fedvi_operator_free(ptr::null_mut());
    }
}

#[test]
fn bad_params_rejected() {
    let mut op = ptr::null_mut();
    let params = CString::new(r#"{"nonsense": 1}"#).unwrap();
    let status = unsafe { fedvi_operator_from_problem(FedviProblemKind::Affine, 3, 1, params.as_ptr(), &mut op) };
    assert_eq!(status, FedviStatus::ConfigRejected);
    assert!(op.is_null());
    assert!(last_error().contains("nonsense"));
}

#[test]
fn experiment_returns_csv() {
    let cfg = CString::new(
        r#"{"problem": {"kind": "affine", "dim": 2}, "algorithm": {"id": "lesgd", "eta": 0.2},
            "federation": {"clients": 2, "local_steps": 2, "rounds": 4}, "log_every": 1}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(fedvi_run_experiment(cfg.as_ptr(), 1, &mut out), FedviStatus::Ok);
        let csv = CStr::from_ptr(out).to_str().unwrap().to_owned();
        fedvi_string_free(out);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("algo,theorem_id,d,M,K,R"));
    }
}

#[test]
fn experiment_config_rejection() {
    let cfg = CString::new(r#"{"problem": {"kind": "affine", "dim": 2}}"#).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { fedvi_run_experiment(cfg.as_ptr(), 0, &mut out) };
    assert_eq!(status, FedviStatus::ConfigRejected);
    assert!(out.is_null());
}

#[test]
fn power_law_fit() {
    let xs = [50.0, 100.0, 200.0, 400.0];
    let ys: Vec<f64> = xs.iter().map(|x| 100.0 / x).collect();
    let (mut s, mut i, mut r2) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            fedvi_fit_power_law(xs.as_ptr(), ys.as_ptr(), 4, &mut s, &mut i, &mut r2),
            FedviStatus::Ok
        );
        assert!((s + 1.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert_eq!(
            fedvi_fit_power_law(xs.as_ptr(), ys.as_ptr(), 3, &mut s, &mut i, &mut r2),
            FedviStatus::InvalidArgument
        );
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fedvi.h")).unwrap();
    for name in [
        "fedvi_last_error",
        "fedvi_operator_from_problem",
        "fedvi_operator_affine",
        "fedvi_operator_load",
        "fedvi_operator_free",
        "fedvi_operator_dim",
        "fedvi_operator_lipschitz",
        "fedvi_operator_eval",
        "fedvi_restricted_gap",
        "fedvi_run_experiment",
        "fedvi_string_free",
        "fedvi_fit_power_law",
        "typedef struct FedviOperator FedviOperator",
        "FEDVI_STATUS_CONFIG_REJECTED = 4",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
