use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::profile::{power_integral, RadialProfile};
use crate::error::{Error, Result};
use crate::special::{ln_add, unit_sphere_area, upper_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Stable,
    Tempered,
    Truncated,
    CustomRadial,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Stable => "stable",
            KernelFamily::Tempered => "tempered",
            KernelFamily::Truncated => "truncated",
            KernelFamily::CustomRadial => "custom",
        }
    }
}

/// Two-sided small-jump bounds `c1 u^{-d-α1} ≤ ρ(u) ≤ c2 u^{-d-α2}` on `(0, κ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallJumpBounds {
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Standard normalization `α 2^{α-1} Γ((d+α)/2) / (π^{d/2} Γ(1-α/2))`.
pub fn stable_normalization(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((d + alpha) / 2.0) / (PI.powf(d / 2.0) * gamma(1.0 - alpha / 2.0))
}

/// Radial jump kernel `J(x, y) = ρ(|x - y|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpKernelSpec {
    pub family: KernelFamily,
    pub dim: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub cnorm: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub profile: Option<RadialProfile>,
}

impl JumpKernelSpec {
    fn base(family: KernelFamily, dim: usize, alpha: f64, gamma: f64) -> Self {
        JumpKernelSpec {
            family,
            dim,
            alpha,
            gamma,
            kappa: 1.0,
            cnorm: None,
            alpha1: None,
            alpha2: None,
            c1: None,
            c2: None,
            profile: None,
        }
    }

    pub fn stable(dim: usize, alpha: f64) -> Self {
        Self::base(KernelFamily::Stable, dim, alpha, 1.0)
    }

    pub fn tempered(dim: usize, alpha: f64, gamma: f64) -> Self {
        Self::base(KernelFamily::Tempered, dim, alpha, gamma)
    }

    pub fn truncated(dim: usize, alpha: f64) -> Self {
        Self::base(KernelFamily::Truncated, dim, alpha, 1.0)
    }

    pub fn custom(dim: usize, profile: RadialProfile) -> Self {
        let (s0, _) = profile.end_slopes();
        let mut k = Self::base(KernelFamily::CustomRadial, dim, -s0 - dim as f64, 1.0);
        k.profile = Some(profile);
        k
    }

    pub fn with_cnorm(mut self, c: f64) -> Self {
        self.cnorm = Some(c);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::param("dimension must be a positive integer"));
        }
        if self.family != KernelFamily::CustomRadial && !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::param(format!("alpha = {} outside (0, 2)", self.alpha)));
        }
        if self.family == KernelFamily::Tempered && !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param(format!("gamma = {} outside (0, 1]", self.gamma)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::param("kappa must be positive"));
        }
        if let Some(c) = self.cnorm {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::param("cnorm must be positive"));
            }
        }
        if self.family == KernelFamily::CustomRadial && self.profile.is_none() {
            return Err(Error::param("custom kernel requires a tabulated profile"));
        }
        let b = self.bounds();
        for a in [b.alpha1, b.alpha2] {
            if !(a > 0.0 && a < 2.0) {
                return Err(Error::param(format!("bound order {a} outside (0, 2)")));
            }
        }
        if b.alpha1 > b.alpha2 {
            return Err(Error::param("alpha1 must not exceed alpha2"));
        }
        if !(b.c1 > 0.0 && b.c2 > 0.0) {
            return Err(Error::param("c1 and c2 must be positive"));
        }
        Ok(())
    }

    /// The small-jump constant (`c(d, α)` for stable, 1 for tempered/truncated unless overridden).
    pub fn normalization(&self) -> f64 {
        self.cnorm.unwrap_or(match self.family {
            KernelFamily::Stable => stable_normalization(self.dim, self.alpha),
            _ => 1.0,
        })
    }

    /// Declared or default small-jump bounds.
    pub fn bounds(&self) -> SmallJumpBounds {
        let (a, c) = match (&self.family, &self.profile) {
            (KernelFamily::CustomRadial, Some(p)) => {
                let d = self.dim as f64;
                let a = -p.end_slopes().0 - d;
                let ratio = |u: f64| p.eval(u) * u.powf(d + a);
                let mut lo = f64::INFINITY;
                let mut hi: f64 = 0.0;
                for &(u, _) in p.knots().iter().filter(|k| k.0 <= self.kappa) {
                    lo = lo.min(ratio(u));
                    hi = hi.max(ratio(u));
                }
                lo = lo.min(ratio(self.kappa));
                hi = hi.max(ratio(self.kappa));
                return SmallJumpBounds {
                    alpha1: self.alpha1.unwrap_or(a),
                    alpha2: self.alpha2.unwrap_or(a),
                    c1: self.c1.unwrap_or(lo),
                    c2: self.c2.unwrap_or(hi),
                };
            }
            _ => (self.alpha, self.normalization()),
        };
        SmallJumpBounds {
            alpha1: self.alpha1.unwrap_or(a),
            alpha2: self.alpha2.unwrap_or(a),
            c1: self.c1.unwrap_or(c),
            c2: self.c2.unwrap_or(c),
        }
    }

    /// Radial profile `ρ(u)`, `u > 0`.
    pub fn profile(&self, u: f64) -> f64 {
        let c = self.normalization();
        let e = -(self.dim as f64) - self.alpha;
        match self.family {
            KernelFamily::Stable => c * u.powf(e),
            KernelFamily::Tempered => {
                if u <= 1.0 {
                    c * u.powf(e)
                } else {
                    (-u.powf(self.gamma)).exp()
                }
            }
            KernelFamily::Truncated => {
                if u <= 1.0 {
                    c * u.powf(e)
                } else {
                    0.0
                }
            }
            KernelFamily::CustomRadial => self.custom_profile().eval(u),
        }
    }

    /// `ln ρ(e^{ln_u})`, finite far beyond the range where `ρ` underflows.
    pub fn ln_profile(&self, ln_u: f64) -> f64 {
        let ln_c = self.normalization().ln();
        let e = -(self.dim as f64) - self.alpha;
        match self.family {
            KernelFamily::Stable => ln_c + e * ln_u,
            KernelFamily::Tempered => {
                if ln_u <= 0.0 {
                    ln_c + e * ln_u
                } else {
                    -(self.gamma * ln_u).exp()
                }
            }
            KernelFamily::Truncated => {
                if ln_u <= 0.0 {
                    ln_c + e * ln_u
                } else {
                    f64::NEG_INFINITY
                }
            }
            KernelFamily::CustomRadial => self.custom_profile().ln_eval(ln_u),
        }
    }

    fn custom_profile(&self) -> &RadialProfile {
        self.profile.as_ref().expect("custom kernel carries a profile")
    }

    /// Whether `ρ` is non-increasing on `(0, ∞)`.
    pub fn is_non_increasing(&self) -> bool {
        match self.family {
            KernelFamily::Stable | KernelFamily::Truncated => true,
            KernelFamily::Tempered => self.normalization() >= (-1.0f64).exp(),
            KernelFamily::CustomRadial => {
                let segs = self.custom_profile().segments();
                segs.iter().all(|s| s.direction == super::profile::Monotone::NonIncreasing)
                    && segs.first().is_some_and(|s| s.lo <= 0.0)
                    && segs.last().is_some_and(|s| s.hi == f64::INFINITY)
                    && segs.windows(2).all(|w| w[1].lo <= w[0].hi)
            }
        }
    }

    pub fn has_infinite_range(&self) -> bool {
        self.family != KernelFamily::Truncated
    }

    /// `ln inf_{a ≤ u ≤ b} ρ(u)` with `b` given by its logarithm.
    pub fn ln_inf_profile(&self, a: f64, ln_b: f64) -> Result<f64> {
        if self.is_non_increasing() {
            return Ok(self.ln_profile(ln_b));
        }
        match self.family {
            KernelFamily::CustomRadial => self.custom_profile().ln_inf(a, ln_b.exp()),
            _ => {
                // tempered with a small constant: the two monotone branches meet at u = 1
                let b = ln_b.exp();
                let mut v = self.ln_profile(ln_b);
                if a <= 1.0 && b >= 1.0 {
                    v = v.min(self.ln_profile(0.0));
                }
                if a < 1.0 {
                    v = v.min(self.ln_profile(b.min(1.0).ln()));
                }
                Ok(v)
            }
        }
    }

    /// `∫_a^b u^k ρ(u) du` along the radial profile.
    pub fn moment(&self, k: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let c = self.normalization();
        let e = k - self.dim as f64 - self.alpha;
        match self.family {
            KernelFamily::Stable => c * power_integral(e, a, b),
            KernelFamily::Truncated => {
                if a >= 1.0 {
                    0.0
                } else {
                    c * power_integral(e, a, b.min(1.0))
                }
            }
            KernelFamily::Tempered => {
                let mut total = 0.0;
                if a < 1.0 {
                    total += c * power_integral(e, a, b.min(1.0));
                }
                if b > 1.0 {
                    let g = self.gamma;
                    let s = (k + 1.0) / g;
                    let lo = a.max(1.0);
                    total += (upper_gamma(s, lo.powf(g)) - upper_gamma(s, b.powf(g))) / g;
                }
                total
            }
            KernelFamily::CustomRadial => self.custom_profile().moment(k, a, b),
        }
    }

    /// One-sided tail `∫_a^∞ ρ(u) du` (the one-dimensional jump intensity beyond `a`).
    pub fn tail_1d(&self, a: f64) -> f64 {
        self.moment(0.0, a, f64::INFINITY)
    }

    /// Total kernel mass outside the ball of radius `a` in `R^d`, in closed form.
    pub fn tail_mass_exact(&self, a: f64) -> f64 {
        unit_sphere_area(self.dim) * self.moment(self.dim as f64 - 1.0, a, f64::INFINITY)
    }

    /// Evaluates `ρ(|z|)`.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::param(format!(
                "displacement has dimension {}, kernel has {}",
                z.len(),
                self.dim
            )));
        }
        let u = norm(z);
        if u == 0.0 {
            return Err(Error::Domain("kernel is singular at the origin".into()));
        }
        Ok(self.profile(u))
    }

    /// `ln ρ(r + shift)` for `r` given by its logarithm.
    pub fn ln_profile_shifted(&self, ln_r: f64, shift: f64) -> f64 {
        self.ln_profile(ln_add(ln_r, shift))
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn stable_constant_cauchy() {
        assert!((stable_normalization(1, 1.0) - 1.0 / PI).abs() < 1e-15);
        // d = 3, α = 1: Γ(2)/(π^{3/2} Γ(1/2)) = 1/π²
        assert!((stable_normalization(3, 1.0) - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn tempered_moments_match_quadrature() {
        let k = JumpKernelSpec::tempered(1, 0.7, 0.5);
        let q = quad::integrate(|u| u * u * k.profile(u), 0.2, 7.0, 1e-13, 1e-12);
        assert!((k.moment(2.0, 0.2, 7.0) - q.value).abs() < 1e-9);
        let t = quad::integrate_tail(|u| k.profile(u), 1.5, 1e-13, 1e-12);
        assert!((k.tail_1d(1.5) - t.value).abs() < 1e-9);
    }

    #[test]
    fn stable_tail_closed_form() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        assert!((k.tail_mass_exact(1.0) - 2.0).abs() < 1e-14);
        assert!((k.tail_1d(2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ln_profile_consistent() {
        for k in [
            JumpKernelSpec::stable(2, 1.3),
            JumpKernelSpec::tempered(1, 0.5, 0.8),
            JumpKernelSpec::truncated(1, 1.5),
        ] {
            for &u in &[0.01, 0.5, 1.0, 2.0, 30.0] {
                let a = k.profile(u);
                let b = k.ln_profile(f64::ln(u)).exp();
                assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            }
        }
    }
}
