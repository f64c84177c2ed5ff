use crate::error::{Error, Result};
use crate::kernels::{ln_jstar_radial, JumpKernelSpec, PotentialSpec, JSTAR_INNER_RADIUS, JSTAR_WINDOW};
use crate::special::{ln_add, ln_unit_ball_volume};

/// A positive weight on `R^d` known through its infimum over centred balls.
pub trait Weight: Send + Sync {
    /// `ln inf_{|x| ≤ R} w(x)` with `R = e^{ln_radius}`.
    fn ln_inf_ball(&self, ln_radius: f64) -> Result<f64>;
}

/// `φ = J*/(1 + V*)`.
#[derive(Debug, Clone)]
pub struct PhiWeight {
    pub kernel: JumpKernelSpec,
    pub pot: PotentialSpec,
}

impl PhiWeight {
    pub fn new(kernel: &JumpKernelSpec, pot: &PotentialSpec) -> Self {
        PhiWeight {
            kernel: kernel.clone(),
            pot: pot.clone(),
        }
    }
}

impl Weight for PhiWeight {
    fn ln_inf_ball(&self, ln_radius: f64) -> Result<f64> {
        let ln3 = JSTAR_INNER_RADIUS.ln();
        // inside radius 3 only V* varies; its radial envelope is non-decreasing
        let inner = -self.pot.ln_one_plus_vstar(ln_radius.min(ln3));
        if ln_radius < ln3 {
            return Ok(inner);
        }
        let jstar_inf = if self.kernel.is_non_increasing() {
            ln_jstar_radial(&self.kernel, ln_radius)?
        } else {
            let outer = ln_add(ln_radius, JSTAR_WINDOW);
            self.kernel.ln_inf_profile(JSTAR_INNER_RADIUS - JSTAR_WINDOW, outer)?
        };
        Ok(inner.min(jstar_inf - self.pot.ln_one_plus_vstar(ln_radius)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantWeight(pub f64);

impl Weight for ConstantWeight {
    fn ln_inf_ball(&self, _: f64) -> Result<f64> {
        Ok(self.0.ln())
    }
}

/// `factor · w`.
#[derive(Debug, Clone)]
pub struct ScaledWeight<W>(pub W, pub f64);

impl<W: Weight> Weight for ScaledWeight<W> {
    fn ln_inf_ball(&self, ln_radius: f64) -> Result<f64> {
        Ok(self.0.ln_inf_ball(ln_radius)? + self.1.ln())
    }
}

/// Minimiser of the `α(r, s)` problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaValue {
    pub ln_value: f64,
    /// `ln t` at the optimum.
    pub ln_t: f64,
}

const SCAN_POINTS: usize = 256;
const WINDOW_SPAN: f64 = 40.0;
const LN_T_CAP: f64 = 18.420_680_743_952_367; // ln 1e8
const LN_T_FLOOR: f64 = -700.0;

struct Problem<'a, W: ?Sized> {
    kernel: &'a JumpKernelSpec,
    weight: &'a W,
    ln_r: f64,
    ln_s: f64,
    ln_ball: f64,
    d: f64,
}

impl<W: Weight + ?Sized> Problem<'_, W> {
    // ln objective, or +∞ when t is infeasible
    fn objective(&self, ln_t: f64) -> Result<f64> {
        let ln_vol = self.ln_ball + self.d * ln_t;
        let ln_inf_rho = self.kernel.ln_inf_profile(0.0, ln_t)?;
        let ln_g = std::f64::consts::LN_2 - ln_inf_rho - ln_vol;
        if !(ln_g <= self.ln_s) {
            return Ok(f64::INFINITY);
        }
        let ln_outer = ln_add(self.ln_r, ln_t.exp());
        let w = self.weight.ln_inf_ball(ln_outer)?;
        Ok(std::f64::consts::LN_2 - ln_vol - 2.0 * w)
    }
}

/// `ln α(r, s)` for `r = e^{ln_r}`:
/// `inf { 2 / (|B(0,t)| inf_{B(0,r+t)} w²) : t ≤ r, 2 sup_{0<u≤t} ρ(u)^{-1} / |B(0,t)| ≤ s }`.
pub fn ln_alpha_rs<W: Weight + ?Sized>(kernel: &JumpKernelSpec, weight: &W, ln_r: f64, s: f64) -> Result<AlphaValue> {
    if !(s > 0.0) || ln_r.is_nan() {
        return Err(Error::param(format!("alpha(r, s) needs r, s > 0 (got ln r = {ln_r}, s = {s})")));
    }
    let p = Problem {
        kernel,
        weight,
        ln_r,
        ln_s: s.ln(),
        ln_ball: ln_unit_ball_volume(kernel.dim),
        d: kernel.dim as f64,
    };
    let top = ln_r.min(LN_T_CAP);
    let mut best = (f64::INFINITY, f64::NAN, 0usize);
    let mut grid = Vec::with_capacity(SCAN_POINTS);
    let mut best_grid = Vec::new();
    let mut extra_windows = None;
    let mut hi = top;
    while hi > LN_T_FLOOR {
        let lo = hi - WINDOW_SPAN;
        grid.clear();
        for i in 0..SCAN_POINTS {
            let ln_t = hi - (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64;
            grid.push(ln_t);
        }
        let mut found = false;
        for (i, &ln_t) in grid.iter().enumerate() {
            let v = p.objective(ln_t)?;
            if v.is_finite() {
                found = true;
                if v < best.0 {
                    best = (v, ln_t, i);
                    best_grid = grid.clone();
                }
            }
        }
        if found && extra_windows.is_none() {
            extra_windows = Some(1);
        } else if let Some(k) = extra_windows {
            if k == 0 {
                break;
            }
            extra_windows = Some(k - 1);
        }
        hi = lo;
    }
    if !best.0.is_finite() {
        return Err(Error::Infeasible { r: ln_r.exp(), s });
    }
    // golden-section refinement between the neighbours of the best grid point
    let i = best.2;
    let a0 = best_grid[(i + 1).min(SCAN_POINTS - 1)];
    let b0 = best_grid[i.saturating_sub(1)];
    let (mut a, mut b) = (a0.min(b0), a0.max(b0).min(top));
    let g = 0.618_033_988_749_894_9;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = p.objective(c)?;
    let mut fd = p.objective(d)?;
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p.objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p.objective(d)?;
        }
        if b - a < 1e-13 * (1.0 + a.abs()) {
            break;
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v < best.0 {
            best = (v, t, i);
        }
    }
    Ok(AlphaValue {
        ln_value: best.0,
        ln_t: best.1,
    })
}

/// `α(r, s)`.
pub fn alpha_rs<W: Weight + ?Sized>(kernel: &JumpKernelSpec, weight: &W, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::param("alpha(r, s) needs r > 0"));
    }
    Ok(ln_alpha_rs(kernel, weight, r.ln(), s)?.ln_value.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_unit_weight() {
        let k = JumpKernelSpec::stable(1, 1.0).with_cnorm(1.0);
        let v = alpha_rs(&k, &ConstantWeight(1.0), 1.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn doubling_weight_quarters_alpha() {
        let k = JumpKernelSpec::stable(1, 0.7);
        let w = PhiWeight::new(&k, &PotentialSpec::power(2.0));
        let a = alpha_rs(&k, &w, 4.0, 0.3).unwrap();
        let b = alpha_rs(&k, &ScaledWeight(w, 2.0), 4.0, 0.3).unwrap();
        assert!((a / b - 4.0).abs() < 1e-9);
    }

    #[test]
    fn huge_radius_in_log_space() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let w = PhiWeight::new(&k, &PotentialSpec::logpower(0.5));
        let v = ln_alpha_rs(&k, &w, 1.6e13, 2.5e-7).unwrap();
        assert!(v.ln_value.is_finite() && v.ln_value > 6.0e13);
    }
}
