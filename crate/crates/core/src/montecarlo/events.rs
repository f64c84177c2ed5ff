use rand::{Rng, RngExt};
use rayon::prelude::*;

use super::paths::{discretization_notes, walk, weighted_path};
use super::{steps_for, FKEstimate, IncrementSampler, PathConfig};
use crate::error::{Error, Result};
use crate::kernels::{jstar, JumpKernelSpec, KernelFamily, PotentialSpec};

/// Relative standard error above which an importance-sampled denominator is inconclusive.
pub const INCONCLUSIVE_REL_STDERR: f64 = 0.3;

/// Intensity of jumps from `y` into `[-m, m]` for the simulated process (Lévy measure `2ρ`).
fn rate_into(spec: &JumpKernelSpec, y: f64, m: f64) -> f64 {
    let a = y.abs() - m;
    if a <= 0.0 {
        return 0.0;
    }
    2.0 * (spec.tail_1d(a) - spec.tail_1d(a + 2.0 * m))
}

/// Joint exit event for `B = B(x, r0)` landing in `B(0, r0/2)` during `[t1, t2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitEvent {
    /// Lévy-system estimate `E ∫_{t1}^{t2 ∧ τ_B} ν(X_s, B(0, r0/2)) ds`.
    pub estimate: FKEstimate,
    /// Plain indicator estimate of the same event.
    pub direct: FKEstimate,
    pub jstar: f64,
    /// `estimate / ((t2 - t1) J*(x))`.
    pub quotient: f64,
    pub quotient_stderr: f64,
}

pub fn exit_event_prob(spec: &JumpKernelSpec, x: f64, r0: f64, t1: f64, t2: f64, cfg: &PathConfig) -> Result<ExitEvent> {
    cfg.validate()?;
    if !(r0 > 0.0) {
        return Err(Error::param("r0 must be positive"));
    }
    if x.abs() < 3.0 || x.abs() <= 1.5 * r0 {
        return Err(Error::Geometry(format!("need |x| >= 3 and |x| > 1.5 r0, got x = {x}, r0 = {r0}")));
    }
    if !(0.0 <= t1 && t1 <= t2) {
        return Err(Error::param("need 0 <= t1 <= t2"));
    }
    let sampler = cfg.sampler(spec)?;
    let mut notes = discretization_notes(cfg, &sampler);
    notes[0] = format!("exits detected at step resolution dt = {}", cfg.dt);
    let js = jstar(spec, &[x])?.value;
    if t1 == t2 {
        let zero = FKEstimate::exact(0.0, cfg.paths, notes);
        return Ok(ExitEvent {
            estimate: zero.clone(),
            direct: zero,
            jstar: js,
            quotient: 0.0,
            quotient_stderr: 0.0,
        });
    }
    let k1 = steps_for(t1, cfg.dt)?;
    let k2 = steps_for(t2, cfg.dt)?;
    let half = 0.5 * r0;
    let dt = cfg.dt;
    let pairs: Vec<(f64, f64)> = (0..cfg.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = cfg.rng(k);
            let (mut levy, mut hit) = (0.0, 0.0);
            walk(&sampler, &mut rng, x, k2, dt, |k, y| {
                let inside = (y - x).abs() < r0;
                if !inside {
                    if k >= k1 && k < k2 && y.abs() < half {
                        hit = 1.0;
                    }
                    return false;
                }
                if k >= k1 && k < k2 {
                    levy += rate_into(spec, y, half) * dt;
                }
                true
            });
            (levy, hit)
        })
        .collect();
    let (levy, hit): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let estimate = FKEstimate::from_samples(&levy, notes.clone());
    let direct = FKEstimate::from_samples(&hit, notes);
    if !(estimate.stderr < estimate.value) {
        return Err(Error::Refused(format!(
            "exit event too rare for N = {} (estimate {:.3e} +- {:.3e}); widen [t1, t2) beyond [{t1}, {t2})",
            cfg.paths, estimate.value, estimate.stderr
        )));
    }
    let scale = (t2 - t1) * js;
    Ok(ExitEvent {
        quotient: estimate.value / scale,
        quotient_stderr: estimate.stderr / scale,
        estimate,
        direct,
        jstar: js,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// `2 |B(0,1)| t ρ(|x| - 1)`, the stable tail bound.
    Analytic,
    /// Forced-first-jump estimate of `T_t^V 1_{B(0,1)}(x)`.
    ImportanceSampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IuRatioRow {
    pub x: f64,
    /// `T_t^V 1_{B(x,1)}(x)`.
    pub numerator: FKEstimate,
    /// `max(numerator - 3 stderr, 0)`.
    pub numerator_lcb: f64,
    pub denominator: f64,
    pub denominator_stderr: f64,
    pub method: Denominator,
    /// `numerator_lcb / denominator`; `None` when inconclusive.
    pub ratio: Option<f64>,
}

/// Local mass against mass reaching the unit ball, along a sequence of starting points.
#[derive(Debug, Clone, PartialEq)]
pub struct IuRatioReport {
    pub t: f64,
    pub rows: Vec<IuRatioRow>,
}

impl IuRatioReport {
    /// Last conclusive ratio over the first.
    pub fn growth(&self) -> Option<f64> {
        let r: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        match (r.first(), r.last()) {
            (Some(&a), Some(&b)) if r.len() >= 2 && a > 0.0 => Some(b / a),
            _ => None,
        }
    }

    /// Whether the conclusive ratios increase strictly along the sequence.
    pub fn monotone_increasing(&self) -> bool {
        let r: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        r.windows(2).all(|w| w[1] > w[0])
    }

    /// Largest over smallest conclusive ratio.
    pub fn spread(&self) -> Option<f64> {
        let r: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
        (r.len() >= 2 && min > 0.0).then(|| max / min)
    }
}

/// Jump size `u ∈ (a, b)` with density `∝ ρ(u)`, by bisection on the tail.
fn jump_in<R: Rng>(spec: &JumpKernelSpec, a: f64, b: f64, rng: &mut R) -> f64 {
    let ta = spec.tail_1d(a);
    let target = ta - rng.random::<f64>() * (ta - spec.tail_1d(b));
    let (mut lo, mut hi) = (a, b);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if spec.tail_1d(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Forced-first-jump estimate of `T_t^V 1_{B(0,1)}(x)`.
///
/// A uniform step `j` is drawn, the path from `x` is run to `j`, forced to jump into
/// `N = B(0, |x|/2)` with weight `t ν(X_j, N)`, and continued to `t`. This estimates the
/// expected number of jumps into `N` weighted by the continuation, an upper bound for
/// the first-entry decomposition.
fn forced_jump_denominator(
    spec: &JumpKernelSpec,
    sampler: &IncrementSampler,
    pot: &PotentialSpec,
    x: f64,
    steps: usize,
    cfg: &PathConfig,
    stream: usize,
) -> FKEstimate {
    let m = 0.5 * x.abs();
    let t = steps as f64 * cfg.dt;
    let samples: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = cfg.rng(stream + k);
            let j = rng.random_range(0..steps);
            let (w0, y) = weighted_path(sampler, pot, &mut rng, x, j, cfg.dt);
            let rate = rate_into(spec, y, m);
            if w0 == 0.0 || rate == 0.0 {
                return 0.0;
            }
            let a = y.abs() - m;
            let u = jump_in(spec, a, a + 2.0 * m, &mut rng);
            let start = y - y.signum() * u;
            let (w1, end) = weighted_path(sampler, pot, &mut rng, start, steps - j, cfg.dt);
            if end.abs() < 1.0 {
                t * rate * w0 * w1
            } else {
                0.0
            }
        })
        .collect();
    let mut notes = discretization_notes(cfg, sampler);
    notes.push("jumps into B(0, |x|/2) counted with multiplicity; paths already inside contribute 0".into());
    FKEstimate::from_samples(&samples, notes)
}

/// Ratio of `T_t^V 1_{B(x,1)}(x)` to a bound on `T_t^V 1_{B(0,1)}(x)` for each `x`, `t = cfg.t`.
pub fn iu_ratio_test(spec: &JumpKernelSpec, pot: &PotentialSpec, xs: &[f64], cfg: &PathConfig) -> Result<IuRatioReport> {
    pot.validate()?;
    let steps = cfg.steps()?;
    let t = cfg.t;
    let order = 1.0 + spec.alpha;
    if !(t > 0.0 && t < order) {
        return Err(Error::param(format!("ratio test needs 0 < t < d + alpha = {order}")));
    }
    let sampler = cfg.sampler(spec)?;
    let mut rows = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        if x.abs() <= 2.0 {
            return Err(Error::Geometry(format!("ratio test needs |x| > 2, got {x}")));
        }
        let stream = 2 * i * cfg.paths;
        let samples: Vec<f64> = (0..cfg.paths)
            .into_par_iter()
            .map(|k| {
                let mut rng = cfg.rng(stream + k);
                let (w, end) = weighted_path(&sampler, pot, &mut rng, x, steps, cfg.dt);
                if (end - x).abs() < 1.0 {
                    w
                } else {
                    0.0
                }
            })
            .collect();
        let numerator = FKEstimate::from_samples(&samples, discretization_notes(cfg, &sampler));
        let lcb = numerator.lower(3.0).max(0.0);
        let (denominator, denominator_stderr, method) = if spec.family == KernelFamily::Stable {
            (2.0 * 2.0 * t * spec.profile(x.abs() - 1.0), 0.0, Denominator::Analytic)
        } else {
            let d = forced_jump_denominator(spec, &sampler, pot, x, steps, cfg, stream + cfg.paths);
            (d.value, d.stderr, Denominator::ImportanceSampled)
        };
        let conclusive = match method {
            Denominator::Analytic => denominator > 0.0,
            Denominator::ImportanceSampled => denominator > 0.0 && denominator_stderr <= INCONCLUSIVE_REL_STDERR * denominator,
        };
        rows.push(IuRatioRow {
            x,
            numerator,
            numerator_lcb: lcb,
            denominator,
            denominator_stderr,
            method,
            ratio: conclusive.then(|| lcb / denominator),
        });
    }
    Ok(IuRatioReport { t, rows })
}
