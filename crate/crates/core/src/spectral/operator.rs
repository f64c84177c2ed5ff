use faer::MatRef;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{JumpKernelSpec, PotentialSpec};

/// Cell-centred grid on `[-L, L]` with an odd number of nodes, so that 0 is a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("grid half-width must be positive"));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::param(format!("grid needs an odd node count >= 3, got {n}")));
        }
        Ok(Grid1D {
            half_width,
            n,
            h: 2.0 * half_width / n as f64,
        })
    }

    /// Grid on `[-L, L]` whose spacing is as close to `h` as an odd node count allows.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::param("grid spacing must be positive"));
        }
        let mut n = (2.0 * half_width / h).round() as usize;
        if n % 2 == 0 {
            n += 1;
        }
        Self::new(half_width, n.max(3))
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + self.h * (i as f64 + 0.5)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn center(&self) -> usize {
        self.n / 2
    }
}

/// Matrix of the quadratic form `f ↦ D^V(f, f)` on grid functions vanishing outside `[-L, L]`.
///
/// `f·Hf = Σ_{i<j} a_{|i-j|} (f_i - f_j)² + Σ_i (k_i + h V_i) f_i²`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid1D,
    pub kernel: JumpKernelSpec,
    pub pot: PotentialSpec,
    /// `V(x_i)`.
    pub potential: Vec<f64>,
    /// Killing weights `k_i` from jumps leaving `[-L, L]`.
    pub killing: Vec<f64>,
    /// Pair weights by index offset; `a_0 = 0`, `a_1` is the neighbour weight.
    pub weights: Vec<f64>,
    data: Vec<f64>,
}

/// Neighbour weight `w1 = 2[∫_0^h u²ρ + ∫_h^{2h} (2 - u/h) u²ρ] / h`.
pub fn neighbour_weight(kernel: &JumpKernelSpec, h: f64) -> f64 {
    let inner = kernel.moment(2.0, 0.0, h);
    let outer = 2.0 * kernel.moment(2.0, h, 2.0 * h) - kernel.moment(3.0, h, 2.0 * h) / h;
    2.0 * (inner + outer) / h
}

/// Assembles `H = A + h diag(V)`; the mass matrix is `h I`.
pub fn assemble(kernel: &JumpKernelSpec, pot: &PotentialSpec, grid: Grid1D) -> Result<DiscreteOperator> {
    kernel.validate()?;
    pot.validate()?;
    if kernel.dim != 1 {
        return Err(Error::param("the discretized operator is one-dimensional"));
    }
    let n = grid.n;
    let h = grid.h;
    let l = grid.half_width;
    let mut potential = Vec::with_capacity(n);
    for i in 0..n {
        let v = pot.value_1d(grid.x(i));
        if !v.is_finite() {
            return Err(Error::Domain(format!("V is not finite at x = {}", grid.x(i))));
        }
        potential.push(v);
    }
    let mut weights = vec![0.0; n];
    if n > 1 {
        weights[1] = neighbour_weight(kernel, h);
    }
    for (k, w) in weights.iter_mut().enumerate().skip(2) {
        *w = 2.0 * h * h * kernel.profile(k as f64 * h);
    }
    let killing: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.x(i);
            2.0 * h * (kernel.tail_1d(l - x) + kernel.tail_1d(l + x))
        })
        .collect();
    let mut prefix = vec![0.0; n];
    for k in 1..n {
        prefix[k] = prefix[k - 1] + weights[k];
    }
    let mut op = DiscreteOperator {
        grid,
        kernel: kernel.clone(),
        pot: pot.clone(),
        potential,
        killing,
        weights,
        data: vec![0.0; n * n],
    };
    let (w, kill, v) = (&op.weights, &op.killing, &op.potential);
    op.data.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        for (i, e) in col.iter_mut().enumerate() {
            *e = if i == j {
                prefix[j] + prefix[n - 1 - j] + kill[j] + h * v[j]
            } else {
                -w[i.abs_diff(j)]
            };
        }
    });
    Ok(op)
}

impl DiscreteOperator {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.grid.n, self.grid.n)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.n + i]
    }

    /// `H f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        assert_eq!(f.len(), n);
        // H is symmetric, so row i is column i
        self.data
            .par_chunks(n)
            .map(|col| col.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `f·Hf`, the discrete `D^V(f, f)`.
    pub fn quadratic(&self, f: &[f64]) -> f64 {
        self.apply(f).iter().zip(f).map(|(a, b)| a * b).sum()
    }

    /// `f·Hf - h Σ V_i f_i²`, the discrete `D(f, f)` (killing included).
    pub fn form_part(&self, f: &[f64]) -> f64 {
        let h = self.grid.h;
        self.quadratic(f) - h * self.potential.iter().zip(f).map(|(v, x)| v * x * x).sum::<f64>()
    }

    /// Same grid and kernel with `V ≡ 0`.
    pub fn without_potential(&self) -> DiscreteOperator {
        let n = self.grid.n;
        let h = self.grid.h;
        let mut out = self.clone();
        for i in 0..n {
            out.data[i * n + i] -= h * self.potential[i];
        }
        out.potential = vec![0.0; n];
        out.pot = PotentialSpec::zero();
        out
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .par_chunks(self.grid.n)
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .reduce(|| 0.0, f64::max)
    }

    /// Largest killing weight per unit mass.
    pub fn max_killing_rate(&self) -> f64 {
        self.killing.iter().cloned().fold(0.0, f64::max) / self.grid.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = Grid1D::new(5.0, 11).unwrap();
        assert_eq!(g.x(5), 0.0);
        for i in 0..11 {
            assert!((g.x(i) + g.x(10 - i)).abs() < 1e-14);
        }
        assert!(Grid1D::new(5.0, 10).is_err());
    }

    #[test]
    fn indicator_row_formula() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let g = Grid1D::new(4.0, 21).unwrap();
        let op = assemble(&k, &PotentialSpec::power(2.0), g).unwrap();
        let i = 7usize;
        let mut f = vec![0.0; 21];
        f[i] = 1.0;
        let far: f64 = (0..21usize)
            .filter(|&j| j.abs_diff(i) > 1)
            .map(|j| 2.0 * g.h * g.h * k.profile((g.x(i) - g.x(j)).abs()))
            .sum();
        let expect = g.h * g.x(i).powi(2) + far + 2.0 * neighbour_weight(&k, g.h) + op.killing[i];
        assert!((op.quadratic(&f) - expect).abs() < 1e-12 * expect);
    }
}
