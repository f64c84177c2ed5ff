use super::alpha::{ln_alpha_rs, PhiWeight};
use super::rate::{gen_inverse_ln, Monotonicity, RateFunction};
use crate::error::{Condition, Error, Result};
use crate::kernels::{ExceptionalSet, JumpKernelSpec, PotentialFamily, PotentialSpec};
use crate::special::{ln_expm1, ln_unit_ball_volume, log_add_exp, softplus};

/// Positive constants `δ1..δ4` of the rate functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deltas {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl Default for Deltas {
    fn default() -> Self {
        Deltas {
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            d4: 1.0,
        }
    }
}

impl Deltas {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("delta1", self.d1), ("delta2", self.d2), ("delta3", self.d3), ("delta4", self.d4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{n} must be positive")));
            }
        }
        Ok(())
    }
}

/// `Φ(s) = inf_{|x| ≥ s} V(x)` after normalising `inf V = 0`.
pub fn big_phi(pot: &PotentialSpec) -> Result<RateFunction> {
    pot.validate()?;
    let p = pot.normalized();
    match p.family {
        PotentialFamily::Power { lambda } => Ok(RateFunction::from_ln(
            format!("Phi: s^{lambda}"),
            Monotonicity::NonDecreasing,
            move |ln_s| Ok(lambda * ln_s),
        )
        .with_inverse(move |ln_r| ln_r / lambda)),
        PotentialFamily::LogPower { lambda } => Ok(RateFunction::from_ln(
            format!("Phi: log^{lambda}(1+s)"),
            Monotonicity::NonDecreasing,
            move |ln_s| Ok(lambda * softplus(ln_s).ln()),
        )
        .with_inverse(move |ln_r| ln_expm1((ln_r / lambda).exp()))),
        PotentialFamily::Custom { ref table } => {
            if !p.grows_unboundedly() {
                return Err(Error::assumption(Condition::PotentialGrowth, "tabulated V stays bounded"));
            }
            let table = table.clone();
            let q = p.clone();
            Ok(RateFunction::from_fn("Phi: tabulated", Monotonicity::NonDecreasing, move |s| {
                let mut m = q.base_radial(s);
                for &(r, v) in table.iter() {
                    if r > s {
                        m = m.min(v);
                    }
                }
                m
            }))
        }
        PotentialFamily::Zero => Err(Error::assumption(Condition::PotentialGrowth, "V is constant")),
        PotentialFamily::Irregular { .. } => Err(Error::Refused(
            "liminf of V at infinity is finite on the exceptional set; use irregular_rates".into(),
        )),
    }
}

/// `β(s) = δ1 α(Φ^{-1}(4/(s∧δ2)), (s∧δ2)/4)`.
pub fn beta_rate(kernel: &JumpKernelSpec, pot: &PotentialSpec, deltas: Deltas) -> Result<RateFunction> {
    kernel.validate()?;
    deltas.validate()?;
    let phi = big_phi(pot)?;
    let weight = PhiWeight::new(kernel, &pot.normalized());
    let k = kernel.clone();
    let Deltas { d1, d2, .. } = deltas;
    Ok(RateFunction::from_ln(
        format!("beta (delta1 = {d1}, delta2 = {d2})"),
        Monotonicity::NonIncreasing,
        move |ln_s| {
            let ln_sm = ln_s.min(d2.ln());
            let ln_r = gen_inverse_ln(&phi, 4f64.ln() - ln_sm)?;
            let a = ln_alpha_rs(&k, &weight, ln_r, ln_sm.exp() / 4.0)?;
            Ok(d1.ln() + a.ln_value)
        },
    ))
}

/// `Φ_K`, `Θ_K`, `Ψ_K` for an irregular potential.
#[derive(Debug, Clone)]
pub struct IrregularRates {
    pub phi_k: RateFunction,
    pub theta_k: RateFunction,
    pub psi_k: RateFunction,
}

// Ψ_K^{-1} can exceed e^{10^13}; radii are kept in log space up to this bound.
const LN_R_MAX: f64 = 1e300;

/// Rates for a potential that stays at a low level on an exceptional set.
pub fn irregular_rates(kernel: &JumpKernelSpec, pot: &PotentialSpec, delta4: f64) -> Result<IrregularRates> {
    kernel.validate()?;
    pot.validate()?;
    let b = kernel.bounds();
    let dim = kernel.dim;
    let d = dim as f64;
    if d <= b.alpha1 {
        return Err(Error::assumption(
            Condition::Dimension,
            format!("d = {dim} does not exceed alpha1 = {}", b.alpha1),
        ));
    }
    if !(delta4 > 0.0) {
        return Err(Error::param("delta4 must be positive"));
    }
    let p = pot.normalized();
    let PotentialFamily::Irregular {
        lambda,
        set,
        level,
        threshold,
    } = p.family
    else {
        return Err(Error::param("irregular_rates needs an irregular potential"));
    };
    if level > threshold {
        return Err(Error::assumption(
            Condition::GrowthOffExceptionalSet,
            format!("level {level} exceeds K = {threshold}"),
        ));
    }
    if let ExceptionalSet::BallUnion { .. } = set {
        if set.total_measure().is_none() {
            return Err(Error::assumption(
                Condition::FiniteSublevelSets,
                "exceptional balls have infinite total volume",
            ));
        }
    }
    let kk = threshold;
    // base ≤ K exactly inside radius R_K
    let ln_rk = ln_expm1(kk.powf(1.0 / lambda));

    // inf of V over {|x| >= R, V > K}: the base branch outside radius R_K
    let phi_k = RateFunction::from_ln(
        format!("Phi_K (K = {kk})"),
        Monotonicity::NonDecreasing,
        move |ln_r| Ok(lambda * softplus(ln_r.max(ln_rk)).ln()),
    )
    .with_domain(f64::NEG_INFINITY, LN_R_MAX)
    .with_inverse(move |ln_y| {
        if ln_y <= kk.ln() {
            f64::NEG_INFINITY
        } else {
            ln_expm1((ln_y / lambda).exp())
        }
    });

    let ln_ball = ln_unit_ball_volume(dim);
    let set_t = set.clone();
    let theta_k = RateFunction::from_ln(
        format!("Theta_K (K = {kk})"),
        Monotonicity::NonIncreasing,
        move |ln_r| {
            let inner = if ln_r < ln_rk {
                // |B(0,R_K) \ B(0,R)|
                let x = d * (ln_r - ln_rk);
                ln_ball + d * ln_rk + (-x.exp()).ln_1p()
            } else {
                f64::NEG_INFINITY
            };
            Ok(log_add_exp(inner, set_t.ln_tail_measure(ln_r)))
        },
    )
    .with_domain(f64::NEG_INFINITY, LN_R_MAX);

    let ratio = b.alpha1 / d;
    let (pk, tk) = (phi_k.clone(), theta_k.clone());
    let psi_k = RateFunction::from_ln(
        format!("Psi_K (K = {kk}, delta4 = {delta4})"),
        Monotonicity::NonDecreasing,
        move |ln_r| {
            let a = -pk.ln_at(ln_r)?;
            let t = delta4.ln() + ratio * tk.ln_at(ln_r)?;
            Ok(-log_add_exp(a, t))
        },
    )
    .with_domain(f64::NEG_INFINITY, LN_R_MAX);

    Ok(IrregularRates { phi_k, theta_k, psi_k })
}

/// `β̂(s) = δ1 α(max(Ψ_K^{-1}(8/(s∧δ2)), δ3), (s∧δ2)/8)`.
///
/// The radius is floored at `δ3`, which keeps `Ψ_K ≥ 8/(s∧δ2)` on the chosen ball.
pub fn beta_hat_rate(kernel: &JumpKernelSpec, pot: &PotentialSpec, deltas: Deltas) -> Result<RateFunction> {
    deltas.validate()?;
    let rates = irregular_rates(kernel, pot, deltas.d4)?;
    let psi = rates.psi_k;
    let weight = PhiWeight::new(kernel, &pot.normalized());
    let k = kernel.clone();
    let Deltas { d1, d2, d3, .. } = deltas;
    Ok(RateFunction::from_ln(
        format!("beta_hat (delta = {d1}, {d2}, {d3}, {})", deltas.d4),
        Monotonicity::NonIncreasing,
        move |ln_s| {
            let ln_sm = ln_s.min(d2.ln());
            let ln_r = gen_inverse_ln(&psi, 8f64.ln() - ln_sm)?.max(d3.ln());
            let a = ln_alpha_rs(&k, &weight, ln_r, ln_sm.exp() / 8.0)?;
            Ok(d1.ln() + a.ln_value)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::super::rate::gen_inverse;
    use super::*;

    #[test]
    fn phi_closed_forms() {
        let f = big_phi(&PotentialSpec::power(2.0)).unwrap();
        assert!((f.eval(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((gen_inverse(&f, 4.0).unwrap() - 2.0).abs() < 1e-14);
        let g = big_phi(&PotentialSpec::logpower(2.0)).unwrap();
        assert!((gen_inverse(&g, 1.0).unwrap() - (1f64.exp() - 1.0)).abs() < 1e-14);
        let irr = PotentialSpec::irregular(1.0, ExceptionalSet::Envelope { c: 1.0, theta: 3.0 }, 1.0, 1.0);
        assert!(matches!(big_phi(&irr), Err(Error::Refused(_))));
    }

    #[test]
    fn beta_linear_in_delta1() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let p = PotentialSpec::logpower(2.0);
        let b1 = beta_rate(&k, &p, Deltas::default()).unwrap();
        let b2 = beta_rate(&k, &p, Deltas { d1: 2.0, ..Deltas::default() }).unwrap();
        for &s in &[1e-4, 0.01, 0.5, 3.0] {
            let r = (b2.ln_eval(s).unwrap() - b1.ln_eval(s).unwrap()).exp();
            assert!((r - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_example_forms() {
        let k = JumpKernelSpec::stable(1, 0.5);
        let set = ExceptionalSet::Envelope { c: 0.7, theta: 2.5 };
        let p = PotentialSpec::irregular(2.0, set, 1.0, 1.0);
        let r = irregular_rates(&k, &p, 1.0).unwrap();
        for &big_r in &[100.0, 1e4, 1e9] {
            let phi = r.phi_k.eval(big_r).unwrap();
            assert!((phi - big_r.ln_1p().powi(2)).abs() < 1e-9 * phi);
            let th = r.theta_k.eval(big_r).unwrap();
            assert!((th - 0.7 * big_r.ln_1p().powf(-2.5)).abs() < 1e-12 * th);
        }
    }
}
