use std::fmt;

use rayon::prelude::*;

use super::exponent::{asymptotic_exponent, ExponentFit, FIT_S_MAX};
use super::rate::{gen_inverse_ln, RateFunction};
use super::rates::{beta_hat_rate, beta_rate, Deltas};
use crate::error::Result;
use crate::kernels::{verify_assumptions, JumpKernelSpec, PotentialSpec, SamplingPlan};
use crate::quad;

/// Half-width of the band around `p = 1` classified as the boundary case.
pub const BOUNDARY_BAND: f64 = 0.05;

/// Upper end of the tail integral of `β^{-1}(s)/s`.
pub const TAIL_CUTOFF: f64 = 1e12;

/// Values of each `δ_i` visited by the sensitivity scan.
pub const DELTA_SCAN: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Yes,
    NotEstablished,
}

impl Flag {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Flag::Yes
        } else {
            Flag::NotEstablished
        }
    }

    pub fn is_yes(self) -> bool {
        self == Flag::Yes
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Yes => "yes",
            Flag::NotEstablished => "not-established",
        })
    }
}

/// Sufficient-condition flags for intrinsic ultra-, super- and hypercontractivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub iu: Flag,
    pub is: Flag,
    pub ih: Flag,
}

impl Flags {
    fn new(iu: bool, is: bool, ih: bool) -> Self {
        // IU ⇒ IS ⇒ IH
        let is = is || iu;
        let ih = ih || is;
        Flags {
            iu: Flag::from_bool(iu),
            is: Flag::from_bool(is),
            ih: Flag::from_bool(ih),
        }
    }

    fn and(self, o: Flags) -> Flags {
        Flags::new(
            self.iu.is_yes() && o.iu.is_yes(),
            self.is.is_yes() && o.is.is_yes(),
            self.ih.is_yes() && o.ih.is_yes(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `β` from a potential tending to infinity.
    Regular,
    /// `β̂` from a potential with an exceptional set.
    Irregular,
    /// A rate function handed in directly.
    Supplied,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Regular => "beta",
            Route::Irregular => "beta_hat",
            Route::Supplied => "supplied",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestPath {
    /// `f` bounded or of polynomial growth.
    Bounded,
    /// Decision table on the fitted exponent.
    Exponent,
    /// Direct sampling of the three limits.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub path: TestPath,
    /// `∫_t^∞ β^{-1}(s)/s ds` from `t = f(0.1)`; `None` when it diverges.
    pub tail_integral: Option<f64>,
    /// Extrapolated remainder beyond the cutoff (fallback path only).
    pub tail_remainder: Option<f64>,
    pub tail_converged: bool,
    /// `(s, s ln f(s))` for `s = 1e-4, 1e-5, 1e-6`.
    pub s_log_f: Vec<(f64, f64)>,
    pub lim_estimate: f64,
    pub limsup_estimate: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub deltas: Deltas,
    pub p: f64,
    pub curvature: bool,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractivityVerdict {
    pub flags: Flags,
    pub route: Route,
    pub exponent: ExponentFit,
    pub diagnostics: Diagnostics,
    pub scan: Vec<ScanEntry>,
    /// Whether every scan entry gave the same flags; `None` without a scan.
    pub scan_stable: Option<bool>,
}

fn s_log_samples(f: &RateFunction) -> Result<Vec<(f64, f64)>> {
    [1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&s| Ok((s, s * f.ln_eval(s)?)))
        .collect()
}

// Aitken Δ² on three terms; plain last term when the differences do not contract
fn aitken(x: &[(f64, f64)]) -> f64 {
    let (a, b, c) = (x[0].1, x[1].1, x[2].1);
    let den = (c - b) - (b - a);
    if den.abs() < 1e-300 || (c - b).abs() >= (b - a).abs() {
        return c;
    }
    c - (c - b) * (c - b) / den
}

fn sequence_bounded(x: &[(f64, f64)]) -> bool {
    x.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-3) + 1e-12)
}

/// Closed-form tail integral for `ln f = a s^{-p} + c`: `β^{-1}(e^u) ≈ (a/(u - c))^{1/p}`.
fn model_tail(fit: &ExponentFit, u0: f64) -> Option<f64> {
    let w = u0 - fit.offset;
    if fit.p <= 0.0 || fit.p >= 1.0 || fit.amplitude <= 0.0 || w <= 0.0 {
        return None;
    }
    let q = 1.0 / fit.p;
    Some(fit.amplitude.powf(q) * w.powf(1.0 - q) / (q - 1.0))
}

struct FallbackOutcome {
    flags: Flags,
    integral: Option<f64>,
    remainder: Option<f64>,
    converged: bool,
    note: String,
}

fn fallback(f: &RateFunction, samples: &[(f64, f64)]) -> Result<FallbackOutcome> {
    let lim = aitken(samples);
    let bounded = sequence_bounded(samples);
    let scale = samples.iter().map(|v| v.1.abs()).fold(1e-12, f64::max);
    let is = bounded && lim.abs() <= 1e-2 * scale;
    let ih = bounded && lim.is_finite();

    let u0 = f.ln_eval(FIT_S_MAX)?;
    let u1 = TAIL_CUTOFF.ln().max(u0 + 10.0);
    let g = |u: f64| -> f64 { gen_inverse_ln(f, u).map(f64::exp).unwrap_or(f64::NAN) };
    let q = quad::integrate(g, u0, u1, 1e-10, 1e-6);
    let (g_half, g_end) = (g(0.5 * (u0 + u1)), g(u1));
    let mut remainder = None;
    let mut converged = false;
    let mut iu = false;
    if q.value.is_finite() && g_end.is_finite() && g_half > 0.0 && g_end > 0.0 {
        // g(u) ≈ A u^{-k} on the last stretch
        let k = (g_half / g_end).ln() / (u1 / (0.5 * (u0 + u1))).ln();
        if k > 1.0 + BOUNDARY_BAND {
            let r = g_end * u1 / (k - 1.0);
            remainder = Some(r);
            converged = r < 0.01 * q.value;
            iu = true;
        }
    }
    let integral = remainder.map(|r| q.value + r);
    Ok(FallbackOutcome {
        flags: Flags::new(iu && is, is, ih),
        integral,
        remainder,
        converged,
        note: format!("fallback: Aitken limit {lim:.4e}, tail quadrature {:.4e} on [{u0:.3}, {u1:.3}]", q.value),
    })
}

fn primary_flags(fit: &ExponentFit) -> Flags {
    if fit.bounded || fit.polynomial {
        return Flags::new(true, true, true);
    }
    let p = fit.p;
    Flags::new(p < 1.0 - BOUNDARY_BAND, p < 1.0 - BOUNDARY_BAND, p <= 1.0 + BOUNDARY_BAND)
}

/// The three asymptotic tests on a `β`-type rate function.
pub fn contractivity_tests(f: &RateFunction) -> Result<ContractivityVerdict> {
    let fit = asymptotic_exponent(f)?;
    let samples = s_log_samples(f)?;
    let mut notes = Vec::new();
    let (path, flags, tail_integral, tail_remainder, tail_converged);
    if fit.bounded || fit.polynomial {
        path = TestPath::Bounded;
        flags = primary_flags(&fit);
        tail_integral = None;
        tail_remainder = None;
        tail_converged = false;
        notes.push(if fit.bounded { "f is bounded near 0".into() } else { "f grows polynomially".into() });
    } else if !fit.curvature {
        path = TestPath::Exponent;
        flags = primary_flags(&fit);
        tail_integral = model_tail(&fit, f.ln_eval(FIT_S_MAX)?);
        tail_remainder = None;
        tail_converged = tail_integral.is_some();
    } else {
        path = TestPath::Fallback;
        let out = fallback(f, &samples)?;
        flags = out.flags;
        tail_integral = out.integral;
        tail_remainder = out.remainder;
        tail_converged = out.converged;
        notes.push(format!("exponent fit rejected (relative RMS {:.2e}, p = {:.4})", fit.relative_rms, fit.p));
        notes.push(out.note);
    }
    let lim = aitken(&samples);
    let limsup = if sequence_bounded(&samples) {
        lim.max(samples[2].1).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(ContractivityVerdict {
        flags,
        route: Route::Supplied,
        exponent: fit,
        diagnostics: Diagnostics {
            path,
            tail_integral,
            tail_remainder,
            tail_converged,
            s_log_f: samples,
            lim_estimate: if path == TestPath::Exponent && flags.is.is_yes() { 0.0 } else { lim },
            limsup_estimate: limsup,
            notes,
        },
        scan: Vec::new(),
        scan_stable: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub deltas: Deltas,
    /// Run the `δ`-sensitivity scan.
    pub scan: bool,
    pub plan: SamplingPlan,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            deltas: Deltas::default(),
            scan: true,
            plan: SamplingPlan::default(),
        }
    }
}

fn route_of(pot: &PotentialSpec) -> Route {
    if pot.is_irregular() {
        Route::Irregular
    } else {
        Route::Regular
    }
}

fn rate_for(kernel: &JumpKernelSpec, pot: &PotentialSpec, route: Route, deltas: Deltas) -> Result<RateFunction> {
    match route {
        Route::Irregular => beta_hat_rate(kernel, pot, deltas),
        _ => beta_rate(kernel, pot, deltas),
    }
}

fn scan_grid(route: Route) -> Vec<Deltas> {
    let mut out = Vec::new();
    for &d1 in &DELTA_SCAN {
        for &d2 in &DELTA_SCAN {
            if route == Route::Irregular {
                for &d3 in &DELTA_SCAN {
                    for &d4 in &DELTA_SCAN {
                        out.push(Deltas { d1, d2, d3, d4 });
                    }
                }
            } else {
                out.push(Deltas { d1, d2, ..Deltas::default() });
            }
        }
    }
    out
}

/// Classifies `(kernel, V)` with default options.
pub fn classify(kernel: &JumpKernelSpec, pot: &PotentialSpec) -> Result<ContractivityVerdict> {
    classify_with(kernel, pot, &ClassifyOptions::default())
}

pub fn classify_with(kernel: &JumpKernelSpec, pot: &PotentialSpec, opts: &ClassifyOptions) -> Result<ContractivityVerdict> {
    verify_assumptions(kernel, pot, &opts.plan)?.into_result()?;
    let route = route_of(pot);
    let mut v = contractivity_tests(&rate_for(kernel, pot, route, opts.deltas)?)?;
    v.route = route;
    if !opts.scan {
        return Ok(v);
    }
    let scan: Vec<ScanEntry> = scan_grid(route)
        .into_par_iter()
        .map(|deltas| {
            let f = rate_for(kernel, pot, route, deltas)?;
            let fit = asymptotic_exponent(&f)?;
            let flags = if fit.curvature && !fit.bounded && !fit.polynomial {
                fallback(&f, &s_log_samples(&f)?)?.flags
            } else {
                primary_flags(&fit)
            };
            Ok(ScanEntry {
                deltas,
                p: fit.p,
                curvature: fit.curvature,
                flags,
            })
        })
        .collect::<Result<_>>()?;
    let stable = scan.iter().all(|e| e.flags == v.flags);
    if !stable {
        let changed = scan.iter().filter(|e| e.flags != v.flags).count();
        v.diagnostics
            .notes
            .push(format!("delta scan: {changed} of {} settings changed the flags", scan.len()));
        v.flags = scan.iter().fold(v.flags, |acc, e| acc.and(e.flags));
    } else {
        v.diagnostics
            .notes
            .push(format!("delta scan: flags identical over {} settings", scan.len()));
    }
    v.scan = scan;
    v.scan_stable = Some(stable);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::super::rate::Monotonicity;
    use super::*;

    fn exp_rate(p: f64) -> RateFunction {
        RateFunction::from_ln("t", Monotonicity::NonIncreasing, move |ln_s| Ok(1.0 + (-p * ln_s).exp()))
    }

    #[test]
    fn decision_table() {
        let f = |p| contractivity_tests(&exp_rate(p)).unwrap().flags;
        assert_eq!(f(0.5), Flags::new(true, true, true));
        assert_eq!(f(1.0), Flags::new(false, false, true));
        assert_eq!(f(1.5), Flags::new(false, false, false));
    }

    #[test]
    fn model_tail_matches_quadrature() {
        let v = contractivity_tests(&exp_rate(0.5)).unwrap();
        let closed = v.diagnostics.tail_integral.unwrap();
        let f = exp_rate(0.5);
        let out = fallback(&f, &s_log_samples(&f).unwrap()).unwrap();
        let num = out.integral.unwrap();
        assert!((closed - num).abs() < 0.05 * closed, "{closed} vs {num}");
    }
}
