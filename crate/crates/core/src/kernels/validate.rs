use super::kernel::{JumpKernelSpec, KernelFamily};
use super::potential::{PotentialFamily, PotentialSpec};
use crate::error::{Condition, Error, Result};
use crate::quad::{self, Quadrature};
use crate::special::unit_sphere_area;

/// Where [`verify_assumptions`] samples the kernel and the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Number of log-spaced radii in `[min_fraction·κ, κ]` for the small-jump sandwich.
    pub small_radii: usize,
    pub min_fraction: f64,
    /// Radii (multiples of `κ`) where strict positivity is probed.
    pub far_multiples: Vec<f64>,
    /// Levels `r` for the sub-level volume check.
    pub levels: Vec<f64>,
    /// Tolerance of the tail-mass quadrature.
    pub quad_tol: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            small_radii: 64,
            min_fraction: 1e-6,
            far_multiples: vec![1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e6],
            levels: vec![0.5, 1.0, 10.0, 100.0],
            quad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    /// `-slope - d` of a log-log fit of `ρ` on the sampled small radii.
    pub fitted_small_jump_order: f64,
    /// `min ρ(u) / (c1 u^{-d-α1})` over the samples (should be ≥ 1).
    pub lower_ratio_min: f64,
    /// `max ρ(u) / (c2 u^{-d-α2})` over the samples (should be ≤ 1).
    pub upper_ratio_max: f64,
    pub tail_mass: Quadrature,
    pub tail_finite: bool,
    /// `(r, |{V ≤ r}|)`; `None` marks an infinite volume.
    pub sublevel: Vec<(f64, Option<f64>)>,
}

impl ValidationReport {
    pub fn violations(&self) -> Vec<Condition> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.condition).collect()
    }

    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, c: Condition) -> Option<&ConditionCheck> {
        self.checks.iter().find(|k| k.condition == c)
    }

    /// First failed check as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(Error::assumption(c.condition, c.detail.clone())),
            None => Ok(self),
        }
    }
}

/// Checks the standing assumptions on a kernel/potential pair.
pub fn verify_assumptions(
    spec: &JumpKernelSpec,
    pot: &PotentialSpec,
    plan: &SamplingPlan,
) -> Result<ValidationReport> {
    spec.validate()?;
    pot.validate()?;
    let d = spec.dim as f64;
    let kappa = spec.kappa;
    let b = spec.bounds();
    let mut checks = Vec::new();

    // small-jump sandwich
    let n = plan.small_radii.max(2);
    let ln_lo = (plan.min_fraction * kappa).ln();
    let ln_hi = kappa.ln();
    let mut lo_min = f64::INFINITY;
    let mut hi_max: f64 = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let mut worst = 0.0;
    for i in 0..n {
        let ln_u = ln_hi - (ln_hi - ln_lo) * (n - 1 - i) as f64 / (n - 1) as f64;
        let ln_rho = spec.ln_profile(ln_u);
        let lo = ln_rho - (b.c1.ln() - (d + b.alpha1) * ln_u);
        let hi = ln_rho - (b.c2.ln() - (d + b.alpha2) * ln_u);
        if lo < lo_min.ln() {
            worst = ln_u.exp();
        }
        lo_min = lo_min.min(lo.exp());
        if hi > hi_max.ln() {
            worst = ln_u.exp();
        }
        hi_max = hi_max.max(hi.exp());
        sx += ln_u;
        sy += ln_rho;
        sxx += ln_u * ln_u;
        sxy += ln_u * ln_rho;
    }
    let nf = n as f64;
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    let fitted = -slope - d;
    let tol = 1e-12;
    let sandwich_ok = lo_min >= 1.0 - tol && hi_max <= 1.0 + tol;
    checks.push(ConditionCheck {
        condition: Condition::SmallJumpBounds,
        passed: sandwich_ok,
        detail: if sandwich_ok {
            format!("fitted order {fitted:.6}; lower ratio >= {lo_min:.6}, upper ratio <= {hi_max:.6}")
        } else {
            format!("bound violated near |z| = {worst:.3e}: lower ratio {lo_min:.6}, upper ratio {hi_max:.6}")
        },
    });

    // strict positivity beyond κ
    let mut zero_at = None;
    for &m in &plan.far_multiples {
        if spec.ln_profile((m * kappa).ln()) == f64::NEG_INFINITY {
            zero_at = Some(m * kappa);
            break;
        }
    }
    if spec.family == KernelFamily::Truncated && zero_at.is_none() {
        zero_at = Some(1.0 + 1e-9);
    }
    checks.push(ConditionCheck {
        condition: Condition::StrictPositivity,
        passed: zero_at.is_none(),
        detail: match zero_at {
            None => "rho > 0 at every probed radius".into(),
            Some(u) => format!("rho vanishes at |z| = {u:.3e}"),
        },
    });

    // tail mass outside κ, by quadrature
    let dm1 = spec.dim as i32 - 1;
    let area = unit_sphere_area(spec.dim);
    let tail = quad::integrate_tail(
        |u| area * spec.profile(u) * u.powi(dm1),
        kappa,
        plan.quad_tol,
        plan.quad_tol,
    );
    let analytic_ok = match (&spec.family, &spec.profile) {
        (KernelFamily::CustomRadial, Some(p)) => p.end_slopes().1 + d - 1.0 < -1.0,
        _ => true,
    };
    let tail_finite = tail.converged && analytic_ok;
    checks.push(ConditionCheck {
        condition: Condition::TailIntegrability,
        passed: tail_finite,
        detail: format!("tail mass {:.10e} +- {:.1e}", tail.value, tail.error),
    });

    // sub-level sets
    let sublevel: Vec<(f64, Option<f64>)> = plan
        .levels
        .iter()
        .map(|&r| (r, pot.sublevel_measure(r, spec.dim)))
        .collect();
    let infinite: Vec<f64> = sublevel.iter().filter(|s| s.1.is_none()).map(|s| s.0).collect();
    checks.push(ConditionCheck {
        condition: Condition::FiniteSublevelSets,
        passed: infinite.is_empty(),
        detail: if infinite.is_empty() {
            "every sampled sub-level set has finite volume".into()
        } else {
            format!("|{{V <= r}}| is infinite for r in {infinite:?}")
        },
    });

    match &pot.family {
        PotentialFamily::Irregular { level, threshold, .. } => {
            let ok = level + pot.offset <= *threshold;
            checks.push(ConditionCheck {
                condition: Condition::GrowthOffExceptionalSet,
                passed: ok,
                detail: if ok {
                    format!("level {level} <= K = {threshold}")
                } else {
                    format!("level {level} exceeds K = {threshold}: V stays bounded on {{V > K}}")
                },
            });
            let ok = d > b.alpha1;
            checks.push(ConditionCheck {
                condition: Condition::Dimension,
                passed: ok,
                detail: format!("d = {} vs alpha1 = {}", spec.dim, b.alpha1),
            });
        }
        _ => {
            let ok = pot.grows_unboundedly();
            checks.push(ConditionCheck {
                condition: Condition::PotentialGrowth,
                passed: ok,
                detail: if ok {
                    "V -> infinity".into()
                } else {
                    "V stays bounded at infinity".into()
                },
            });
        }
    }

    Ok(ValidationReport {
        checks,
        fitted_small_jump_order: fitted,
        lower_ratio_min: lo_min,
        upper_ratio_max: hi_max,
        tail_mass: tail,
        tail_finite,
        sublevel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ExceptionalSet;

    #[test]
    fn stable_passes() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        let r = verify_assumptions(&k, &PotentialSpec::logpower(1.0), &SamplingPlan::default()).unwrap();
        assert!(r.is_ok(), "{:?}", r.checks);
        assert!((r.tail_mass.value - 2.0).abs() < 1e-8);
        assert!((r.fitted_small_jump_order - 1.0).abs() < 1e-10);
    }

    #[test]
    fn truncated_flags_positivity() {
        let k = JumpKernelSpec::truncated(1, 1.0);
        let r = verify_assumptions(&k, &PotentialSpec::power(2.0), &SamplingPlan::default()).unwrap();
        assert_eq!(r.violations(), vec![Condition::StrictPositivity], "{:?}", r.checks);
    }

    #[test]
    fn zero_potential_flags_sublevel() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let r = verify_assumptions(&k, &PotentialSpec::zero(), &SamplingPlan::default()).unwrap();
        assert!(r.violations().contains(&Condition::FiniteSublevelSets));
    }

    #[test]
    fn irregular_dimension() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let set = ExceptionalSet::Envelope { c: 1.0, theta: 2.0 };
        let pot = PotentialSpec::irregular(2.0, set, 1.0, 1.0);
        let r = verify_assumptions(&k, &pot, &SamplingPlan::default()).unwrap();
        assert_eq!(r.violations(), vec![Condition::Dimension]);
    }
}
