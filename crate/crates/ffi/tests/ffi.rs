use std::ffi::{CStr, CString};
use std::ptr;

use fkc_ffi::*;

const SCENARIO: &str = "[kernel]\nfamily = stable\nalpha = 1\n[potential]\nfamily = logpower\nlambda = 2\n";

fn last_error() -> String {
    let p = fkc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(text: &str) -> *mut FkcScenario {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fkc_scenario_new(c.as_ptr(), &mut h) }, FkcStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(fkc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_arguments_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fkc_scenario_new(ptr::null(), &mut h) }, FkcStatus::NullPointer);
    assert!(last_error().contains("config"));
    let mut v = 0.0;
    assert_eq!(unsafe { fkc_kernel_eval(ptr::null(), 1.0, &mut v) }, FkcStatus::NullPointer);
    let s = scenario(SCENARIO);
    assert_eq!(unsafe { fkc_kernel_eval(s, 1.0, ptr::null_mut()) }, FkcStatus::NullPointer);
    unsafe { fkc_scenario_free(s) };
    unsafe { fkc_scenario_free(ptr::null_mut()) };
}

#[test]
fn parse_errors_map_to_status() {
    let c = CString::new("[kernel]\nalfa = 1\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { fkc_scenario_new(c.as_ptr(), &mut h) }, FkcStatus::Parse);
    assert!(h.is_null());
    let msg = last_error();
    assert!(msg.contains("line 2") && msg.contains("alfa"), "{msg}");
}

#[test]
fn kernel_and_weight_values() {
    let s = scenario(SCENARIO);
    let mut v = 0.0;
    assert_eq!(unsafe { fkc_kernel_eval(s, 2.0, &mut v) }, FkcStatus::Ok);
    // c(1, 1) |z|^{-2} with c = 1/π
    assert!((v - 0.25 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(unsafe { fkc_kernel_eval(s, 0.0, &mut v) }, FkcStatus::Domain);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(unsafe { fkc_phi_lower(s, 5.0, &mut a) }, FkcStatus::Ok);
    assert_eq!(unsafe { fkc_phi_lower(s, 50.0, &mut b) }, FkcStatus::Ok);
    assert!(a > b && b > 0.0);
    unsafe { fkc_scenario_free(s) };
}

#[test]
fn classify_through_the_handle() {
    let s = scenario(SCENARIO);
    let mut v = std::mem::MaybeUninit::<FkcVerdict>::uninit();
    assert_eq!(unsafe { fkc_classify(s, v.as_mut_ptr()) }, FkcStatus::Ok);
    let v = unsafe { v.assume_init() };
    assert_eq!((v.iu, v.is, v.ih), (1, 1, 1));
    assert!((v.p - 0.5).abs() < 0.05);
    unsafe { fkc_scenario_free(s) };
}

#[test]
fn ground_state_and_feynman_kac() {
    let s = scenario(SCENARIO);
    let n = 401;
    let mut l1 = 0.0;
    let mut phi = vec![0.0; n];
    assert_eq!(unsafe { fkc_ground_state(s, 20.0, n, &mut l1, phi.as_mut_ptr()) }, FkcStatus::Ok);
    assert!(l1 > 0.0);
    assert!(phi.iter().all(|&p| p > 0.0));
    assert_eq!(unsafe { fkc_ground_state(s, 20.0, 400, &mut l1, ptr::null_mut()) }, FkcStatus::InvalidArgument);

    let zero = scenario("[kernel]\nfamily = stable\n[potential]\nfamily = zero\n");
    let mut e = FkcEstimate { value: 0.0, stderr: 0.0, n: 0 };
    assert_eq!(
        unsafe { fkc_feynman_kac(zero, 0.0, 1.0, 0.01, 500, 1, FkcTestFunction::One, 1.0, &mut e) },
        FkcStatus::Ok
    );
    assert_eq!((e.value, e.stderr, e.n), (1.0, 0.0, 500));
    assert_eq!(
        unsafe { fkc_feynman_kac(s, 0.0, 1.0, 0.3, 500, 1, FkcTestFunction::Bump, 1.0, &mut e) },
        FkcStatus::InvalidArgument
    );
    unsafe {
        fkc_scenario_free(s);
        fkc_scenario_free(zero);
    }
}

#[test]
fn run_config_reports_the_cli_status() {
    let d = tempfile::TempDir::new().unwrap();
    let cfg = d.path().join("t.cfg");
    std::fs::write(
        &cfg,
        "[scenario]\nid = t\ntask = validate\n[kernel]\nfamily = truncated\n[potential]\nfamily = power\nlambda = 2\n",
    )
    .unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let out = CString::new(d.path().to_str().unwrap()).unwrap();
    let mut code = -1;
    assert_eq!(unsafe { fkc_run_config(path.as_ptr(), out.as_ptr(), &mut code) }, FkcStatus::Ok);
    assert_eq!(code, 2);
    assert!(last_error().contains("strict-positivity"));
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fkc.h")).unwrap();
    for f in [
        "fkc_scenario_new",
        "fkc_scenario_free",
        "fkc_kernel_eval",
        "fkc_phi_lower",
        "fkc_classify",
        "fkc_ground_state",
        "fkc_feynman_kac",
        "fkc_run_config",
        "fkc_last_error_message",
        "fkc_version",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct FkcScenario FkcScenario"));
    assert!(h.contains("FKC_STATUS_OK = 0"));
}
