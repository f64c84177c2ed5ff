//! Jump kernels, potentials, and the derived fields `J*`, `V*`, `φ`.
//!
//! All kernels are radial: `J(x, y) = ρ(|x - y|)`.

mod kernel;
mod potential;
mod profile;
mod validate;

pub use kernel::{stable_normalization, JumpKernelSpec, KernelFamily, SmallJumpBounds};
pub use potential::{ExceptionalSet, PotentialFamily, PotentialSpec};
pub use profile::{Monotone, MonotoneSegment, RadialProfile};
pub use validate::{verify_assumptions, ConditionCheck, SamplingPlan, ValidationReport};

use crate::error::Result;
use crate::special::ln_add;
use kernel::norm;

/// Radius below which `J*` is identically 1.
pub const JSTAR_INNER_RADIUS: f64 = 3.0;
/// Half-width of the displacement window defining `J*`.
pub const JSTAR_WINDOW: f64 = 1.5;

/// A lower-bound value that may degenerate to zero for finite-range kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    /// Set when the bound is identically zero (kernel vanishes in the window).
    pub zero: bool,
}

impl LowerBound {
    fn from_ln(ln: f64) -> Self {
        LowerBound {
            value: ln.exp(),
            zero: ln == f64::NEG_INFINITY,
        }
    }
}

/// `ρ(z)` for a displacement `z ≠ 0`.
pub fn eval_kernel(spec: &JumpKernelSpec, z: &[f64]) -> Result<f64> {
    spec.eval(z)
}

/// `ln J*` at radius `e^{ln_r}`.
pub fn ln_jstar_radial(spec: &JumpKernelSpec, ln_r: f64) -> Result<f64> {
    if ln_r < JSTAR_INNER_RADIUS.ln() {
        return Ok(0.0);
    }
    let r = ln_r.exp();
    spec.ln_inf_profile(r - JSTAR_WINDOW, ln_add(ln_r, JSTAR_WINDOW))
}

/// `J*(x)`: 1 inside radius 3, else the infimum of `ρ` over `[|x| - 3/2, |x| + 3/2]`.
pub fn jstar(spec: &JumpKernelSpec, x: &[f64]) -> Result<LowerBound> {
    Ok(LowerBound::from_ln(ln_jstar_radial(spec, norm(x).ln())?))
}

/// `V*(x) = sup_{B(x,1)} V`.
pub fn vstar(pot: &PotentialSpec, x: &[f64]) -> f64 {
    pot.vstar(x)
}

/// `φ(x) = J*(x) / (1 + V*(x))`.
pub fn phi_lower(spec: &JumpKernelSpec, pot: &PotentialSpec, x: &[f64]) -> Result<LowerBound> {
    let j = jstar(spec, x)?;
    Ok(LowerBound {
        value: j.value / (1.0 + pot.vstar(x)),
        zero: j.zero,
    })
}

/// `ln φ` at radius `e^{ln_r}` using the radial `V*` envelope.
pub fn ln_phi_radial(spec: &JumpKernelSpec, pot: &PotentialSpec, ln_r: f64) -> Result<f64> {
    Ok(ln_jstar_radial(spec, ln_r)? - pot.ln_one_plus_vstar(ln_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jstar_examples() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        assert_eq!(jstar(&k, &[2.0]).unwrap().value, 1.0);
        assert!((jstar(&k, &[4.0]).unwrap().value - 5.5f64.powi(-2)).abs() < 1e-15);
        let t = JumpKernelSpec::tempered(1, 1.0, 1.0);
        assert!((jstar(&t, &[10.0]).unwrap().value - (-11.5f64).exp()).abs() < 1e-18);
        let tr = JumpKernelSpec::truncated(1, 1.0);
        let j = jstar(&tr, &[3.0]).unwrap();
        assert!(j.zero && j.value == 0.0);
    }

    #[test]
    fn phi_examples() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        let p2 = PotentialSpec::power(2.0);
        assert_eq!(phi_lower(&k, &p2, &[0.0]).unwrap().value, 0.5);
        let v = phi_lower(&k, &p2, &[4.0]).unwrap().value;
        assert!((v - 5.5f64.powi(-2) / 26.0).abs() < 1e-16);
        let t = JumpKernelSpec::tempered(1, 1.0, 1.0);
        let v = phi_lower(&t, &PotentialSpec::power(1.0), &[10.0]).unwrap().value;
        assert!((v - (-11.5f64).exp() / 12.0).abs() < 1e-18);
    }

    #[test]
    fn kernel_examples() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        assert_eq!(eval_kernel(&k, &[2.0]).unwrap(), 0.25);
        assert!(eval_kernel(&k, &[0.0]).is_err());
        let t = JumpKernelSpec::tempered(1, 1.0, 1.0);
        assert!((eval_kernel(&t, &[2.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        let t = JumpKernelSpec::tempered(1, 0.5, 1.0);
        assert!((eval_kernel(&t, &[0.5]).unwrap() - 0.5f64.powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn ln_phi_matches_pointwise() {
        let k = JumpKernelSpec::stable(1, 0.8);
        let p = PotentialSpec::logpower(2.0);
        for &r in &[0.5, 2.9, 3.5, 17.0, 1e5] {
            let a = phi_lower(&k, &p, &[r]).unwrap().value;
            let b = ln_phi_radial(&k, &p, f64::ln(r)).unwrap().exp();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
