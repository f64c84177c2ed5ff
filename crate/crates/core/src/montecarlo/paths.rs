use rand::Rng;
use rayon::prelude::*;
use statrs::stats_tests::ks_test::{ks_twosample, KSTwoSampleAlternativeMethod};
use statrs::stats_tests::NaNPolicy;

use super::{FKEstimate, IncrementSampler, PathConfig};
use crate::error::{Error, Result};
use crate::kernels::{JumpKernelSpec, PotentialSpec};

/// Steps a path from `x0`; `visit(k, X_k)` runs for `k = 0..=steps` until it returns `false`.
///
/// The increment over one step of length `dt` is that of the process with Lévy
/// measure `ρ` over `2 dt`, i.e. the process whose Dirichlet form is `∬ (f(x) - f(y))² ρ`.
pub(crate) fn walk<R: Rng>(
    sampler: &IncrementSampler,
    rng: &mut R,
    x0: f64,
    steps: usize,
    dt: f64,
    mut visit: impl FnMut(usize, f64) -> bool,
) -> f64 {
    let mut x = x0;
    if !visit(0, x) {
        return x;
    }
    for k in 1..=steps {
        x += sampler.sample(2.0 * dt, rng);
        if !visit(k, x) {
            break;
        }
    }
    x
}

pub(crate) fn discretization_notes(cfg: &PathConfig, sampler: &IncrementSampler) -> Vec<String> {
    let mut notes = vec![format!("trapezoid rule for the potential integral at dt = {}", cfg.dt)];
    if let Some(eps) = sampler.small_jump_cutoff() {
        notes.push(match cfg.small_jumps {
            super::SmallJumps::Gaussian => format!("jumps below {eps} replaced by a matched-variance Gaussian"),
            super::SmallJumps::Drop => format!("jumps below {eps} dropped"),
        });
    }
    notes
}

/// Weight `exp(-Σ_k w_k V(X_k) Δt)` along a path and its endpoint, with
/// trapezoid weights `w_0 = w_m = 1/2` and `w_k = 1` otherwise.
pub(crate) fn weighted_path<R: Rng>(
    sampler: &IncrementSampler,
    pot: &PotentialSpec,
    rng: &mut R,
    x0: f64,
    steps: usize,
    dt: f64,
) -> (f64, f64) {
    let mut s = 0.0;
    let end = walk(sampler, rng, x0, steps, dt, |k, x| {
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        s += w * pot.value_1d(x) * dt;
        // the weight has underflowed; the endpoint no longer matters
        s < 800.0
    });
    if s >= 800.0 {
        (0.0, end)
    } else {
        ((-s).exp(), end)
    }
}

/// `E^x[exp(-∫_0^t V(X_s) ds) f(X_t)]` with `t = cfg.t`.
pub fn feynman_kac<F>(spec: &JumpKernelSpec, pot: &PotentialSpec, x: f64, f: F, cfg: &PathConfig) -> Result<FKEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    pot.validate()?;
    let steps = cfg.steps()?;
    let sampler = cfg.sampler(spec)?;
    let samples: Vec<f64> = (0..cfg.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = cfg.rng(k);
            let (w, end) = weighted_path(&sampler, pot, &mut rng, x, steps, cfg.dt);
            if w == 0.0 {
                0.0
            } else {
                w * f(end)
            }
        })
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("test function is not finite along a path".into()));
    }
    Ok(FKEstimate::from_samples(&samples, discretization_notes(cfg, &sampler)))
}

/// Exit times from `B(x, r)` up to the horizon `cfg.t`; `∞` when the path stays inside.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitTimes {
    pub r: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
}

impl ExitTimes {
    /// Fraction of paths with `τ ≥ t`.
    pub fn survival(&self, t: f64) -> f64 {
        self.times.iter().filter(|&&s| s >= t).count() as f64 / self.times.len() as f64
    }

    /// Sample median of `τ`, if it lies within the horizon.
    pub fn median(&self) -> Option<f64> {
        let mut v = self.times.clone();
        v.sort_by(f64::total_cmp);
        let m = v[(v.len() - 1) / 2];
        m.is_finite().then_some(m)
    }

    /// `min(τ, horizon) / scale`.
    pub fn scaled(&self, scale: f64) -> Vec<f64> {
        self.times.iter().map(|t| t.min(self.horizon) / scale).collect()
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("ball radius must be positive"));
    }
    Ok(())
}

pub fn exit_times(spec: &JumpKernelSpec, x: f64, r: f64, cfg: &PathConfig) -> Result<ExitTimes> {
    check_radius(r)?;
    let steps = cfg.steps()?;
    let sampler = cfg.sampler(spec)?;
    let times = (0..cfg.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = cfg.rng(k);
            let mut tau = f64::INFINITY;
            walk(&sampler, &mut rng, x, steps, cfg.dt, |k, y| {
                if k > 0 && (y - x).abs() >= r {
                    tau = k as f64 * cfg.dt;
                    return false;
                }
                true
            });
            tau
        })
        .collect();
    Ok(ExitTimes { r, horizon: cfg.t, times })
}

/// `P^x(τ_{B(x, r)} ≥ t)` with `t = cfg.t`, exits detected at step resolution.
pub fn exit_time_prob(spec: &JumpKernelSpec, x: f64, r: f64, cfg: &PathConfig) -> Result<FKEstimate> {
    check_radius(r)?;
    cfg.validate()?;
    let sampler = cfg.sampler(spec)?;
    let mut notes = discretization_notes(cfg, &sampler);
    notes[0] = format!("exits detected at step resolution dt = {}; overshoot within a step ignored", cfg.dt);
    if cfg.t == 0.0 {
        return Ok(FKEstimate::exact(1.0, cfg.paths, notes));
    }
    let et = exit_times(spec, x, r, cfg)?;
    let t = cfg.t;
    let samples: Vec<f64> = et.times.iter().map(|&s| if s >= t { 1.0 } else { 0.0 }).collect();
    Ok(FKEstimate::from_samples(&samples, notes))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    ks_twosample(
        a.to_vec(),
        b.to_vec(),
        KSTwoSampleAlternativeMethod::TwoSidedAsymptotic,
        NaNPolicy::Error,
    )
    .map_err(|e| Error::param(format!("KS test: {e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_unit_function_is_exact() {
        let cfg = PathConfig::new(1.0, 200, 3);
        let e = feynman_kac(&JumpKernelSpec::stable(1, 1.0), &PotentialSpec::zero(), 0.0, |_| 1.0, &cfg).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert!(!e.bias_notes.is_empty());
    }

    #[test]
    fn survival_at_zero_is_one() {
        let cfg = PathConfig::new(0.0, 50, 1);
        let e = exit_time_prob(&JumpKernelSpec::stable(1, 1.0), 0.0, 1.0, &cfg).unwrap();
        assert_eq!(e.value, 1.0);
    }
}
