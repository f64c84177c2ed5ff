use rayon::prelude::*;

use super::eigen::SpectralSolution;
use super::operator::DiscreteOperator;
use super::testfn::{l2_sq, mollified_noise, trial_rng};
use crate::error::{Condition, Error, Result};
use crate::kernels::{phi_lower, JumpKernelSpec, KernelFamily, PotentialFamily, PotentialSpec};

/// Closed-form ground-state envelope `E(x)` where one is known.
pub fn ground_state_envelope(kernel: &JumpKernelSpec, pot: &PotentialSpec) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    let d = kernel.dim as f64;
    match (kernel.family, &pot.family) {
        (KernelFamily::Stable, PotentialFamily::LogPower { lambda }) => {
            let (a, l) = (kernel.alpha, *lambda);
            Ok(Box::new(move |x: f64| {
                let r = x.abs();
                (1.0 + r).powf(-(d + a)) * r.ln_1p().powf(-l)
            }))
        }
        (KernelFamily::Tempered, PotentialFamily::Power { lambda }) => {
            let (g, l) = (kernel.gamma, *lambda);
            Ok(Box::new(move |x: f64| {
                let r = x.abs();
                (1.0 + r).powf(-l) * (-r.powf(g)).exp()
            }))
        }
        (f, _) => Err(Error::NotAvailable(format!(
            "no closed-form ground-state envelope for the {} kernel with this potential",
            f.name()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRange {
    pub min: f64,
    pub max: f64,
    pub from: f64,
    pub to: f64,
}

impl EnvelopeRange {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateBounds {
    /// `max φ(x_i)/φ_1(x_i)` over `|x_i| ≤ L/2`.
    pub c0: f64,
    pub c0_at: f64,
    pub window: f64,
    /// Range of `φ_1/E` over `2 ≤ |x| ≤ L/2`; `None` without a known envelope.
    pub envelope: Option<EnvelopeRange>,
}

/// Lower-bound constant `C_0` with `C_0 φ_1 ≥ φ` and the envelope ratio range.
pub fn groundstate_bounds_check(sol: &SpectralSolution, kernel: &JumpKernelSpec, pot: &PotentialSpec) -> Result<GroundStateBounds> {
    let g = sol.grid;
    let window = 0.5 * g.half_width;
    let phi1 = sol.phi1();
    let mut c0 = 0.0;
    let mut c0_at = f64::NAN;
    for i in 0..g.n {
        let x = g.x(i);
        if x.abs() > window {
            continue;
        }
        let lb = phi_lower(kernel, pot, &[x])?;
        let r = lb.value / phi1[i];
        if !(r <= c0) {
            c0 = r;
            c0_at = x;
        }
    }
    let envelope = match ground_state_envelope(kernel, pot) {
        Ok(e) => {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..g.n {
                let x = g.x(i);
                if x.abs() < 2.0 || x.abs() > window {
                    continue;
                }
                let r = phi1[i] / e(x);
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Some(EnvelopeRange {
                min: lo,
                max: hi,
                from: 2.0,
                to: window,
            })
        }
        Err(Error::NotAvailable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(GroundStateBounds {
        c0,
        c0_at,
        window,
        envelope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperPoincareReport {
    pub r: f64,
    pub s: f64,
    pub alpha: f64,
    pub trials: usize,
    pub violations: usize,
    /// Largest `LHS / RHS` seen.
    pub worst_ratio: f64,
}

/// `Σ_{|x_i| ≤ r} f_i² h ≤ s f·Hf + α (Σ |f_i| w_i h)²` on random test functions.
pub fn super_poincare_check(
    op: &DiscreteOperator,
    weight: &[f64],
    r: f64,
    s: f64,
    alpha_value: f64,
    trials: usize,
    seed: u64,
) -> Result<SuperPoincareReport> {
    let g = op.grid;
    if r >= 0.5 * g.half_width {
        return Err(Error::Geometry(format!("r = {r} must be below L/2 = {}", 0.5 * g.half_width)));
    }
    if weight.len() != g.n {
        return Err(Error::param("weight must have one value per node"));
    }
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let f = mollified_noise(&g, 0.5 * g.half_width, &mut trial_rng(seed, k as u64));
            super_poincare_ratio(op, weight, r, s, alpha_value, &f)
        })
        .collect();
    Ok(SuperPoincareReport {
        r,
        s,
        alpha: alpha_value,
        trials,
        violations: ratios.iter().filter(|&&q| q > 1.0 + 1e-12).count(),
        worst_ratio: ratios.iter().cloned().fold(0.0, f64::max),
    })
}

/// `LHS / RHS` of the super Poincaré inequality for one grid function.
pub fn super_poincare_ratio(op: &DiscreteOperator, weight: &[f64], r: f64, s: f64, alpha_value: f64, f: &[f64]) -> f64 {
    let g = op.grid;
    let lhs: f64 = (0..g.n).filter(|&i| g.x(i).abs() <= r).map(|i| f[i] * f[i]).sum::<f64>() * g.h;
    let l1: f64 = f.iter().zip(weight).map(|(a, w)| a.abs() * w).sum::<f64>() * g.h;
    let rhs = s * op.quadratic(f) + alpha_value * l1 * l1;
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `Σ_{i<j} a_{|i-j|} φ_1(x_i) φ_1(x_j) (f_i - f_j)²`, the ground-state transformed form.
pub fn weighted_form(op: &DiscreteOperator, sol: &SpectralSolution, f: &[f64]) -> Result<f64> {
    if op.kernel.family != KernelFamily::Stable {
        return Err(Error::NotAvailable(format!(
            "the weighted-form identity is established for stable kernels, not {}",
            op.kernel.family.name()
        )));
    }
    let n = op.n();
    let phi = sol.phi1();
    let w = &op.weights;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in i + 1..n {
                let d = f[i] - f[j];
                acc += w[j - i] * phi[i] * phi[j] * d * d;
            }
            acc
        })
        .sum())
}

/// `D^V(fφ_1, fφ_1) - λ_1 Σ f² φ_1² h`, computed through `H`.
pub fn schrodinger_side(op: &DiscreteOperator, sol: &SpectralSolution, f: &[f64]) -> f64 {
    let phi = sol.phi1();
    let g: Vec<f64> = f.iter().zip(phi).map(|(a, b)| a * b).collect();
    op.quadratic(&g) - sol.lambda1() * l2_sq(&op.grid, &g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnRow {
    pub n: f64,
    pub mu_g2: f64,
    pub mu_abs_sq: f64,
    pub form: f64,
    pub r_n: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnProbe {
    pub rows: Vec<GnRow>,
    /// Scale `c` of `r_n = c / log^λ(1+n)`.
    pub c: f64,
    /// Log-log slope of `bound / log^{2λ}(1+n)` against `n`.
    pub slope: f64,
    /// Log-log slope of `μ(g_n²) log^{2λ}(1+n)` against `n`.
    pub mu_slope: f64,
    pub excluded: Vec<f64>,
}

/// `g_n`: 0 on `|x| ≤ n`, linear on `[n, 2n]`, 1 beyond.
pub fn g_n(op: &DiscreteOperator, n: f64) -> Vec<f64> {
    (0..op.n())
        .map(|i| ((op.grid.x(i).abs() - n) / n).clamp(0.0, 1.0))
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Lower bound on any super Poincaré rate of the ground-state semigroup at `r_n`.
pub fn gn_probe(op: &DiscreteOperator, sol: &SpectralSolution, n_values: &[f64]) -> Result<GnProbe> {
    let PotentialFamily::LogPower { lambda } = op.pot.family else {
        return Err(Error::NotAvailable("the g_n probe is set up for logarithmic potentials".into()));
    };
    let nmax = n_values.iter().cloned().fold(0.0, f64::max);
    if 2.0 * nmax > 0.5 * op.grid.half_width {
        return Err(Error::Geometry(format!(
            "2 max n = {} must not exceed L/2 = {}",
            2.0 * nmax,
            0.5 * op.grid.half_width
        )));
    }
    let h = op.grid.h;
    let phi = sol.phi1();
    let mut raw = Vec::new();
    let mut excluded = Vec::new();
    for &n in n_values {
        let g = g_n(op, n);
        let mu_g2: f64 = g.iter().zip(phi).map(|(a, p)| a * a * p * p).sum::<f64>() * h;
        let mu_abs: f64 = g.iter().zip(phi).map(|(a, p)| a.abs() * p * p).sum::<f64>() * h;
        if !(mu_abs * mu_abs > 1e-280) {
            excluded.push(n);
            continue;
        }
        let form = weighted_form(op, sol, &g)?;
        raw.push((n, mu_g2, mu_abs * mu_abs, form));
    }
    if raw.len() < 2 {
        return Err(Error::param("g_n probe needs at least two usable n"));
    }
    let lg = |n: f64| n.ln_1p().powf(lambda);
    let c = 0.5
        * raw
            .iter()
            .map(|&(n, mu, _, form)| mu * lg(n) / form)
            .fold(f64::INFINITY, f64::min);
    let rows: Vec<GnRow> = raw
        .iter()
        .map(|&(n, mu_g2, mu_abs_sq, form)| {
            let r_n = c / lg(n);
            GnRow {
                n,
                mu_g2,
                mu_abs_sq,
                form,
                r_n,
                bound: (mu_g2 - r_n * form) / mu_abs_sq,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.bound / lg(r.n).powi(2)).ln()).collect();
    let ms: Vec<f64> = rows.iter().map(|r| (r.mu_g2 * lg(r.n).powi(2)).ln()).collect();
    Ok(GnProbe {
        slope: slope(&xs, &ys),
        mu_slope: slope(&xs, &ms),
        rows,
        c,
        excluded,
    })
}

/// Discrete generator `(L_V ψ)_i = -(Hψ)_i / h`.
pub fn generator(op: &DiscreteOperator, psi: &[f64]) -> Vec<f64> {
    let h = op.grid.h;
    op.apply(psi).into_iter().map(|v| -v / h).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub c0: f64,
    /// `max (L_V ψ)_i / ψ_i` over the checked range.
    pub max_ratio: f64,
    pub max_at: f64,
    /// Radius beyond which `L_V ψ ≤ 0` on the checked range.
    pub negative_beyond: Option<f64>,
    /// Checked range `|x| ≤ range`.
    pub range: f64,
    /// `(x_i, Σ_{ψ_j > ψ_i} a_ij (ψ_j - ψ_i) / (h ψ_i))` for `x_i ≥ 0`.
    pub positive_inflow: Vec<(f64, f64)>,
}

/// `ψ(x) = e^{-(1+x²)^{γ/2}} / (C_0 + (1+x²)^{λ/2})`.
pub fn lyapunov_function(gamma: f64, lambda: f64, c0: f64, x: f64) -> f64 {
    let q = 1.0 + x * x;
    (-q.powf(gamma / 2.0)).exp() / (c0 + q.powf(lambda / 2.0))
}

/// Applies the discrete generator to the Lyapunov candidate of the tempered/power scenario.
pub fn lyapunov_check(op: &DiscreteOperator, c0: f64) -> Result<LyapunovReport> {
    let (KernelFamily::Tempered, PotentialFamily::Power { lambda }) = (op.kernel.family, &op.pot.family) else {
        return Err(Error::NotAvailable("the Lyapunov candidate is set up for tempered kernels with power potentials".into()));
    };
    if !(c0 > 0.0) {
        return Err(Error::param("C0 must be positive"));
    }
    let g = op.grid;
    let gamma = op.kernel.gamma;
    let psi: Vec<f64> = (0..g.n).map(|i| lyapunov_function(gamma, *lambda, c0, g.x(i))).collect();
    let lv = generator(op, &psi);
    let range = 0.5 * g.half_width;
    let ok = |i: usize| g.x(i).abs() <= range && psi[i] > 1e-250;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut max_at = f64::NAN;
    let mut outer = 0.0f64;
    let mut last_positive: Option<f64> = None;
    for i in 0..g.n {
        if !ok(i) {
            continue;
        }
        let x = g.x(i);
        outer = outer.max(x.abs());
        let r = lv[i] / psi[i];
        if r > max_ratio {
            max_ratio = r;
            max_at = x;
        }
        if lv[i] > 0.0 {
            last_positive = Some(last_positive.map_or(x.abs(), |v| v.max(x.abs())));
        }
    }
    let negative_beyond = match last_positive {
        None => Some(0.0),
        Some(r) if r < outer => Some(r),
        Some(_) => None,
    };
    let w = &op.weights;
    let positive_inflow = (g.center()..g.n)
        .filter(|&i| ok(i))
        .map(|i| {
            let mut s = 0.0;
            for j in 0..g.n {
                if j != i && psi[j] > psi[i] {
                    s += w[i.abs_diff(j)] * (psi[j] - psi[i]);
                }
            }
            (g.x(i), s / (g.h * psi[i]))
        })
        .collect();
    Ok(LyapunovReport {
        c0,
        max_ratio,
        max_at,
        negative_beyond,
        range,
        positive_inflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevReport {
    pub q: f64,
    pub trials: usize,
    pub max_ratio: f64,
}

/// `‖f‖_q² / (D(f, f) + ‖f‖_2²)` with `q = 2/(1 - α_1)`.
pub fn sobolev_ratio(op: &DiscreteOperator, alpha1: f64, f: &[f64]) -> f64 {
    let h = op.grid.h;
    let q = 2.0 / (1.0 - alpha1);
    let lq = (f.iter().map(|v| v.abs().powf(q)).sum::<f64>() * h).powf(2.0 / q);
    lq / (op.form_part(f) + l2_sq(&op.grid, f))
}

/// Largest Sobolev ratio over random compactly supported test functions (the potential is ignored).
pub fn sobolev_check(op: &DiscreteOperator, alpha1: f64, trials: usize, seed: u64) -> Result<SobolevReport> {
    let d = op.kernel.dim as f64;
    if !(alpha1 > 0.0) {
        return Err(Error::param("alpha1 must be positive"));
    }
    if alpha1 >= d {
        return Err(Error::assumption(
            Condition::Dimension,
            format!("d = {} does not exceed alpha1 = {alpha1}", op.kernel.dim),
        ));
    }
    let g = op.grid;
    let max_ratio = (0..trials)
        .into_par_iter()
        .map(|k| {
            let f = mollified_noise(&g, 0.5 * g.half_width, &mut trial_rng(seed, k as u64));
            sobolev_ratio(op, alpha1, &f)
        })
        .reduce(|| 0.0, f64::max);
    Ok(SobolevReport {
        q: 2.0 / (1.0 - alpha1),
        trials,
        max_ratio,
    })
}
