use faer::Mat;

use super::eigen::{dense_spectrum, SpectralSolution};
use super::operator::{assemble, Grid1D};
use crate::error::{Error, Result};
use crate::kernels::{JumpKernelSpec, PotentialSpec};

/// Largest admissible truncation error, relative to the largest entry.
pub const MAX_TRUNCATION_FRACTION: f64 = 0.1;

/// `p^V(t, x_i, x_j)` from the spectral sum.
#[derive(Debug, Clone)]
pub struct HeatKernelMatrix {
    pub t: f64,
    pub h: f64,
    pub values: Mat<f64>,
    pub modes_used: usize,
    /// Bound on the per-entry error from omitted modes and rounding.
    pub truncation_error: f64,
    /// `Σ_k e^{-λ_k t}` over the modes used.
    pub spectral_trace: f64,
}

impl HeatKernelMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// `Σ_i p(t, x_i, x_i) h`.
    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.values[(i, i)]).sum::<f64>() * self.h
    }

    pub fn max_entry(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for j in 0..n {
            for &v in self.values.col_as_slice(j) {
                m = m.max(v);
            }
        }
        m
    }

    /// Number of entries below `-truncation_error`.
    pub fn negative_entries(&self) -> usize {
        let n = self.n();
        (0..n)
            .map(|j| self.values.col_as_slice(j).iter().filter(|&&v| v < -self.truncation_error).count())
            .sum()
    }

    /// `p(t) h p(s)`, the Chapman-Kolmogorov product.
    pub fn compose(&self, other: &HeatKernelMatrix) -> Mat<f64> {
        let mut m = &self.values * &other.values;
        let h = self.h;
        let n = self.n();
        for j in 0..n {
            for v in m.col_as_slice_mut(j) {
                *v *= h;
            }
        }
        m
    }
}

/// Heat kernel at time `t` from the first `k_max` modes (all available when `None`).
pub fn heat_kernel(sol: &SpectralSolution, t: f64, k_max: Option<usize>) -> Result<HeatKernelMatrix> {
    if !(t > 0.0) {
        return Err(Error::param("heat kernel needs t > 0"));
    }
    let n = sol.grid.n;
    let h = sol.grid.h;
    let k = k_max.unwrap_or(sol.modes()).min(sol.modes()).max(1);
    let weights: Vec<f64> = sol.eigenvalues[..k].iter().map(|l| (-l * t).exp()).collect();
    let b = Mat::from_fn(n, k, |i, m| sol.vectors[(i, m)] * (0.5 * (-sol.eigenvalues[m] * t)).exp());
    let mut values = &b * b.transpose();
    for j in 0..n {
        for i in 0..j {
            values[(i, j)] = values[(j, i)];
        }
    }
    let trace_sum: f64 = weights.iter().sum();
    // every |φ_k(x)|² is at most 1/h
    let omitted = if k < n {
        let next = if k < sol.modes() {
            sol.eigenvalues[k]
        } else {
            sol.eigenvalues[k - 1]
        };
        (n - k) as f64 * (-next * t).exp() / h
    } else {
        0.0
    };
    let rounding = k as f64 * f64::EPSILON * trace_sum / h;
    let hk = HeatKernelMatrix {
        t,
        h,
        values,
        modes_used: k,
        truncation_error: omitted + rounding,
        spectral_trace: trace_sum,
    };
    let max = hk.max_entry();
    if hk.truncation_error > MAX_TRUNCATION_FRACTION * max {
        let need = if sol.modes() > k {
            (k..sol.modes())
                .find(|&m| (n - m) as f64 * (-sol.eigenvalues[m] * t).exp() / h <= MAX_TRUNCATION_FRACTION * max)
                .map(|m| m.to_string())
                .unwrap_or_else(|| format!("more than {}", sol.modes()))
        } else {
            format!("more than {k}")
        };
        return Err(Error::Refused(format!(
            "truncation error {:.3e} exceeds {}% of the largest entry {max:.3e} at t = {t}; need k_max = {need}",
            hk.truncation_error,
            MAX_TRUNCATION_FRACTION * 100.0
        )));
    }
    Ok(hk)
}

/// `sup p^V(t, x, y) / (φ_1(x) φ_1(y))` over entries not dominated by truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IuRatio {
    pub sup: f64,
    pub at: (f64, f64),
    pub included: usize,
    pub excluded: usize,
}

impl IuRatio {
    pub fn coverage(&self) -> f64 {
        self.included as f64 / (self.included + self.excluded).max(1) as f64
    }
}

pub fn iu_ratio(hk: &HeatKernelMatrix, sol: &SpectralSolution) -> IuRatio {
    let n = hk.n();
    let phi = sol.phi1();
    let mut best = IuRatio {
        sup: 0.0,
        at: (f64::NAN, f64::NAN),
        included: 0,
        excluded: 0,
    };
    for j in 0..n {
        let col = hk.values.col_as_slice(j);
        for i in 0..=j {
            let p = col[i];
            if p <= 0.0 || hk.truncation_error > MAX_TRUNCATION_FRACTION * p || phi[i] <= 0.0 || phi[j] <= 0.0 {
                best.excluded += 1;
                continue;
            }
            best.included += 1;
            let r = p / (phi[i] * phi[j]);
            if r > best.sup {
                best.sup = r;
                best.at = (sol.grid.x(i), sol.grid.x(j));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct IuTrendRow {
    pub half_width: f64,
    pub n: usize,
    pub lambda1: f64,
    pub ratio: IuRatio,
}

/// IU ratio at several truncations `L` with a fixed spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct IuTrend {
    pub t: f64,
    pub rows: Vec<IuTrendRow>,
}

impl IuTrend {
    /// Last sup over first sup.
    pub fn growth(&self) -> f64 {
        self.rows.last().unwrap().ratio.sup / self.rows[0].ratio.sup
    }
}

pub fn iu_trend(kernel: &JumpKernelSpec, pot: &PotentialSpec, spacing: f64, t: f64, half_widths: &[f64]) -> Result<IuTrend> {
    if half_widths.is_empty() {
        return Err(Error::param("iu_trend needs at least one half-width"));
    }
    let mut rows = Vec::new();
    for &l in half_widths {
        let grid = Grid1D::with_spacing(l, spacing)?;
        let op = assemble(kernel, pot, grid)?;
        let sol = dense_spectrum(&op)?;
        let hk = heat_kernel(&sol, t, None)?;
        rows.push(IuTrendRow {
            half_width: l,
            n: grid.n,
            lambda1: sol.lambda1(),
            ratio: iu_ratio(&hk, &sol),
        });
    }
    Ok(IuTrend { t, rows })
}
