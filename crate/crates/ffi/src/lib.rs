//! C interface to the `fkc` engines.
//!
//! Every function returns an [`FkcStatus`]; on failure the message is available from
//! [`fkc_last_error_message`] on the same thread. Scenarios are opaque handles created
//! from config text and released with [`fkc_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fkc::cli::{self, Scenario};
use fkc::criteria::{classify, Flag, Route};
use fkc::kernels::phi_lower;
use fkc::montecarlo::{feynman_kac, PathConfig};
use fkc::spectral::{assemble, bump, ground_state, Grid1D};
use fkc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Assumption = 4,
    Domain = 5,
    NotConverged = 6,
    Refused = 7,
    NotAvailable = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkcRoute {
    Beta = 0,
    BetaHat = 1,
    Supplied = 2,
}

/// Test function for [`fkc_feynman_kac`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FkcTestFunction {
    /// `f ≡ 1`.
    One = 0,
    /// Smooth bump supported on `(-width, width)`.
    Bump = 1,
    /// Indicator of `(-width, width)`.
    Ball = 2,
}

/// Flags are 1 for "yes" and 0 for "not established".
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkcVerdict {
    pub iu: i32,
    pub is: i32,
    pub ih: i32,
    pub route: FkcRoute,
    pub p: f64,
    pub r_squared: f64,
    /// 1 stable, 0 unstable, -1 no scan.
    pub scan_stable: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkcEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Opaque scenario handle.
pub struct FkcScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FkcStatus {
    match e {
        Error::Domain(_) => FkcStatus::Domain,
        Error::Parameter(_) => FkcStatus::InvalidArgument,
        Error::Assumption { .. } => FkcStatus::Assumption,
        Error::UnboundedInverse { .. } | Error::Infeasible { .. } => FkcStatus::Domain,
        Error::Solver { .. } => FkcStatus::NotConverged,
        Error::NotAvailable(_) => FkcStatus::NotAvailable,
        Error::Geometry(_) => FkcStatus::InvalidArgument,
        Error::Refused(_) => FkcStatus::Refused,
        Error::Parse { .. } => FkcStatus::Parse,
        Error::Io(_) => FkcStatus::Io,
    }
}

fn fail(status: FkcStatus, msg: impl Into<String>) -> FkcStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), FkcStatus>) -> FkcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FkcStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(FkcStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, FkcStatus>;
}

impl<T> OrStatus<T> for fkc::Result<T> {
    fn or_status(self) -> Result<T, FkcStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, FkcStatus> {
    if p.is_null() {
        return Err(fail(FkcStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FkcStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a>(s: *const FkcScenario) -> Result<&'a Scenario, FkcStatus> {
    s.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| fail(FkcStatus::NullPointer, "scenario handle is null"))
}

fn out_ptr<T>(p: *mut T) -> Result<(), FkcStatus> {
    if p.is_null() {
        Err(fail(FkcStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

/// Parses scenario config text; `[scenario]` may omit `id` and `task`.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fkc_scenario_new(config: *const c_char, out: *mut *mut FkcScenario) -> FkcStatus {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let text = str_arg(config, "config")?;
        let mut cfg = cli::parse(text).or_status()?;
        if cfg.get("scenario", "id").is_none() {
            cfg.set("scenario", "id", "ffi");
        }
        if cfg.get("scenario", "task").is_none() {
            cfg.set("scenario", "task", "classify");
        }
        let inner = Scenario::from_config(&cfg).or_status()?;
        *out = Box::into_raw(Box::new(FkcScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from [`fkc_scenario_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fkc_scenario_free(scenario: *mut FkcScenario) {
    if !scenario.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(scenario))));
    }
}

/// `ρ(|z|)` for a one-dimensional displacement `z ≠ 0`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fkc_kernel_eval(scenario: *const FkcScenario, z: f64, out: *mut f64) -> FkcStatus {
    guard(|| {
        let sc = handle(scenario)?;
        out_ptr(out)?;
        let mut full = vec![0.0; sc.kernel.dim];
        full[0] = z;
        *out = sc.kernel.eval(&full).or_status()?;
        Ok(())
    })
}

/// `φ(x) = J*(x) / (1 + V*(x))` on the first axis.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fkc_phi_lower(scenario: *const FkcScenario, x: f64, out: *mut f64) -> FkcStatus {
    guard(|| {
        let sc = handle(scenario)?;
        out_ptr(out)?;
        let mut p = vec![0.0; sc.kernel.dim];
        p[0] = x;
        *out = phi_lower(&sc.kernel, &sc.pot, &p).or_status()?.value;
        Ok(())
    })
}

/// Contractivity verdict with default options.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fkc_classify(scenario: *const FkcScenario, out: *mut FkcVerdict) -> FkcStatus {
    guard(|| {
        let sc = handle(scenario)?;
        out_ptr(out)?;
        let v = classify(&sc.kernel, &sc.pot).or_status()?;
        let flag = |f: Flag| i32::from(f.is_yes());
        *out = FkcVerdict {
            iu: flag(v.flags.iu),
            is: flag(v.flags.is),
            ih: flag(v.flags.ih),
            route: match v.route {
                Route::Regular => FkcRoute::Beta,
                Route::Irregular => FkcRoute::BetaHat,
                Route::Supplied => FkcRoute::Supplied,
            },
            p: v.exponent.p,
            r_squared: v.exponent.r_squared,
            scan_stable: v.scan_stable.map_or(-1, i32::from),
        };
        Ok(())
    })
}

/// Ground state on `[-L, L]` with `n` nodes (odd). `phi` may be null, otherwise it
/// receives `n` values of `φ_1` normalized in `L²`.
///
/// # Safety
/// `lambda1` must be valid; `phi`, if not null, must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fkc_ground_state(
    scenario: *const FkcScenario,
    half_width: f64,
    n: usize,
    lambda1: *mut f64,
    phi: *mut f64,
) -> FkcStatus {
    guard(|| {
        let sc = handle(scenario)?;
        out_ptr(lambda1)?;
        let grid = Grid1D::new(half_width, n).or_status()?;
        let op = assemble(&sc.kernel, &sc.pot, grid).or_status()?;
        let sol = ground_state(&op).or_status()?;
        *lambda1 = sol.lambda1();
        if !phi.is_null() {
            ptr::copy_nonoverlapping(sol.phi1().as_ptr(), phi, n);
        }
        Ok(())
    })
}

/// Monte Carlo `E^x[exp(-∫_0^t V(X_s) ds) f(X_t)]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fkc_feynman_kac(
    scenario: *const FkcScenario,
    x: f64,
    t: f64,
    dt: f64,
    paths: usize,
    seed: u64,
    f: FkcTestFunction,
    width: f64,
    out: *mut FkcEstimate,
) -> FkcStatus {
    guard(|| {
        let sc = handle(scenario)?;
        out_ptr(out)?;
        if !(width > 0.0) {
            return Err(fail(FkcStatus::InvalidArgument, "width must be positive"));
        }
        let cfg = PathConfig::new(t, paths, seed).with_dt(dt);
        let e = match f {
            FkcTestFunction::One => feynman_kac(&sc.kernel, &sc.pot, x, |_| 1.0, &cfg),
            FkcTestFunction::Bump => feynman_kac(&sc.kernel, &sc.pot, x, |y| bump(y / width), &cfg),
            FkcTestFunction::Ball => feynman_kac(&sc.kernel, &sc.pot, x, |y| f64::from(u8::from(y.abs() < width)), &cfg),
        }
        .or_status()?;
        *out = FkcEstimate {
            value: e.value,
            stderr: e.stderr,
            n: e.n,
        };
        Ok(())
    })
}

/// Runs a scenario file like `fkc run`. `exit_status` receives the CLI exit code.
///
/// # Safety
/// Strings must be NUL-terminated; `exit_status` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fkc_run_config(path: *const c_char, out_dir: *const c_char, exit_status: *mut i32) -> FkcStatus {
    guard(|| {
        out_ptr(exit_status)?;
        let path = str_arg(path, "path")?;
        let out = str_arg(out_dir, "out_dir")?;
        match cli::run(Path::new(path), Path::new(out)) {
            Ok(o) => {
                *exit_status = o.status;
                if o.status != cli::EXIT_OK {
                    set_error(o.message);
                }
                Ok(())
            }
            Err(e) => {
                *exit_status = cli::exit_status(&e);
                Err(fail(status_of(&e), e.to_string()))
            }
        }
    })
}

/// Message of the last failure on this thread, or null. Valid until the next call
/// into this library on the same thread.
#[no_mangle]
pub extern "C" fn fkc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fkc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
