use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngExt};
use rand_distr::{Exp1, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::{stable_normalization, JumpKernelSpec, KernelFamily};
use crate::special::upper_gamma_regularized;

/// Default small-jump cutoff for tempered and truncated kernels.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Treatment of jumps below the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallJumps {
    /// Gaussian with the variance of the removed jumps.
    #[default]
    Gaussian,
    Drop,
}

/// Increment sampler for the Lévy process with Lévy measure `ρ(|z|) dz` on the line.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    alpha: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    /// `exp(-t s |ξ|^α)`.
    Stable { s: f64 },
    Layered(Layers),
}

#[derive(Debug, Clone)]
struct Layers {
    eps: f64,
    /// Variance rate of the Gaussian surrogate for jumps below `eps`.
    small_var: f64,
    /// Intensity of jumps with size in `(eps, 1]`.
    mid_rate: f64,
    /// Intensity of jumps larger than 1.
    big_rate: f64,
    gamma: f64,
    /// `Q(1/γ, 1)`.
    big_q1: f64,
}

impl IncrementSampler {
    pub fn new(spec: &JumpKernelSpec, eps: f64) -> Result<Self> {
        Self::with_small_jumps(spec, eps, SmallJumps::Gaussian)
    }

    pub fn with_small_jumps(spec: &JumpKernelSpec, eps: f64, small: SmallJumps) -> Result<Self> {
        spec.validate()?;
        if spec.dim != 1 {
            return Err(Error::param("path simulation is one-dimensional"));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::param(format!("small-jump cutoff {eps} outside (0, 1]")));
        }
        let alpha = spec.alpha;
        let kind = match spec.family {
            KernelFamily::Stable => Kind::Stable {
                s: spec.normalization() / stable_normalization(1, alpha),
            },
            KernelFamily::Tempered | KernelFamily::Truncated => {
                let big_rate = if spec.family == KernelFamily::Tempered {
                    2.0 * spec.tail_1d(1.0)
                } else {
                    0.0
                };
                Kind::Layered(Layers {
                    eps,
                    small_var: match small {
                        SmallJumps::Gaussian => 2.0 * spec.moment(2.0, 0.0, eps),
                        SmallJumps::Drop => 0.0,
                    },
                    mid_rate: 2.0 * spec.moment(0.0, eps, 1.0),
                    big_rate,
                    gamma: spec.gamma,
                    big_q1: upper_gamma_regularized(1.0 / spec.gamma, 1.0),
                })
            }
            KernelFamily::CustomRadial => {
                return Err(Error::param("no path sampler for custom kernels"));
            }
        };
        Ok(IncrementSampler { alpha, kind })
    }

    /// Jump intensity beyond 1, zero for stable kernels where it is not simulated separately.
    pub fn big_jump_rate(&self) -> f64 {
        match &self.kind {
            Kind::Stable { .. } => 0.0,
            Kind::Layered(l) => l.big_rate,
        }
    }

    /// Cutoff below which jumps are replaced by a Gaussian, if any.
    pub fn small_jump_cutoff(&self) -> Option<f64> {
        match &self.kind {
            Kind::Stable { .. } => None,
            Kind::Layered(l) => Some(l.eps),
        }
    }

    /// Displacement over a time step `dt`.
    pub fn sample<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Stable { s } => (dt * s).powf(1.0 / self.alpha) * standard_stable(self.alpha, rng),
            Kind::Layered(l) => {
                let mut x = (l.small_var * dt).sqrt() * rng.sample::<f64, _>(StandardNormal);
                x += self.compound(l.mid_rate * dt, rng, |r| self.mid_jump(l.eps, r));
                x += self.compound(l.big_rate * dt, rng, |r| big_jump(l, r));
                x
            }
        }
    }

    /// Number of jumps larger than 1 over `dt`, the count feeding the big-jump layer.
    pub fn big_jump_count<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> u64 {
        poisson(self.big_jump_rate() * dt, rng)
    }

    fn compound<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R, mut jump: impl FnMut(&mut R) -> f64) -> f64 {
        let n = poisson(mean, rng);
        let mut x = 0.0;
        for _ in 0..n {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            x += sign * jump(rng);
        }
        x
    }

    /// Size with density `∝ u^{-1-α}` on `(eps, 1]`.
    fn mid_jump<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> f64 {
        let a = self.alpha;
        let lo = eps.powf(-a);
        let u: f64 = rng.random();
        (lo - u * (lo - 1.0)).powf(-1.0 / a)
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = Poisson::new(mean).expect("positive Poisson mean");
    rng.sample::<f64, _>(p) as u64
}

/// Size with density `∝ e^{-u^γ}` on `(1, ∞)` by inverting the tail `Q(1/γ, u^γ) / Q(1/γ, 1)`.
fn big_jump<R: Rng + ?Sized>(l: &Layers, rng: &mut R) -> f64 {
    if l.gamma == 1.0 {
        return 1.0 + rng.sample::<f64, _>(Exp1);
    }
    let s = 1.0 / l.gamma;
    let target = (1.0 - rng.random::<f64>()) * l.big_q1;
    // bracket in w = u^γ
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while upper_gamma_regularized(s, hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if upper_gamma_regularized(s, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    (0.5 * (lo + hi)).powf(s)
}

/// Symmetric stable variate with characteristic function `exp(-|ξ|^α)` (Chambers-Mallows-Stuck).
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (rng.random::<f64>() - 0.5) * 2.0 * FRAC_PI_2;
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// One increment of the process with Lévy measure `ρ` over `dt`, with the default cutoff.
pub fn sample_increment<R: Rng + ?Sized>(spec: &JumpKernelSpec, dt: f64, rng: &mut R) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::param("time step must be positive"));
    }
    Ok(IncrementSampler::new(spec, DEFAULT_EPS)?.sample(dt, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::trial_rng;

    #[test]
    fn custom_is_rejected() {
        use crate::kernels::{Monotone, MonotoneSegment, RadialProfile};
        let seg = MonotoneSegment {
            lo: 0.0,
            hi: f64::INFINITY,
            direction: Monotone::NonIncreasing,
        };
        let p = RadialProfile::new(vec![(0.1, 100.0), (10.0, 0.01)], vec![seg]).unwrap();
        let k = JumpKernelSpec::custom(1, p);
        k.validate().unwrap();
        assert!(matches!(IncrementSampler::new(&k, DEFAULT_EPS), Err(Error::Parameter(_))));
        assert!(IncrementSampler::new(&JumpKernelSpec::stable(1, 2.0), DEFAULT_EPS).is_err());
    }

    #[test]
    fn tempered_mid_jumps_stay_in_range() {
        let s = IncrementSampler::new(&JumpKernelSpec::tempered(1, 1.0, 1.0), 0.01).unwrap();
        let mut rng = trial_rng(1, 0);
        for _ in 0..1000 {
            let u = s.mid_jump(0.01, &mut rng);
            assert!((0.01..=1.0).contains(&u));
        }
    }
}
