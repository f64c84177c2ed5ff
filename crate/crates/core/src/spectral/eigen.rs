use faer::linalg::solvers::Solve;
use faer::{Mat, Par, Side};

use super::operator::{DiscreteOperator, Grid1D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Subspace size of the shift-and-invert iteration.
    pub block: usize,
    pub max_iter: usize,
    /// Residual tolerance relative to `‖H‖_∞`.
    pub tol: f64,
    /// Number of converged pairs requested.
    pub modes: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            block: 8,
            max_iter: 500,
            tol: 1e-10,
            modes: 1,
        }
    }
}

/// Eigenpairs `(λ_k, φ_k)` with `Σ φ_k(x_i)² h = 1`, `λ_1` first.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub grid: Grid1D,
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenfunctions sampled at the nodes.
    pub vectors: Mat<f64>,
    /// `‖Hφ_1 - θ_1 φ_1‖_2 / ‖H‖_∞` for unit `φ_1`.
    pub residual: f64,
    pub iterations: usize,
    /// Whether every eigenpair of the grid operator is present.
    pub complete: bool,
}

impl SpectralSolution {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn phi1(&self) -> &[f64] {
        self.vectors.col_as_slice(0)
    }

    pub fn mode(&self, k: usize) -> &[f64] {
        self.vectors.col_as_slice(k)
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Whether `φ_1 > 0` at every node.
    pub fn positive(&self) -> bool {
        self.phi1().iter().all(|&v| v > 0.0)
    }
}

fn finish(op: &DiscreteOperator, values: &[f64], vecs: Mat<f64>, residual: f64, iterations: usize, complete: bool) -> SpectralSolution {
    let h = op.grid.h;
    let n = op.n();
    let k = values.len();
    let scale = 1.0 / h.sqrt();
    let mut vectors = vecs;
    for j in 0..k {
        let col = vectors.col_as_slice_mut(j);
        let sign = if col.iter().sum::<f64>() < 0.0 { -scale } else { scale };
        for v in col.iter_mut() {
            *v *= sign;
        }
    }
    debug_assert_eq!(vectors.nrows(), n);
    SpectralSolution {
        grid: op.grid,
        eigenvalues: values.iter().map(|t| t / h).collect(),
        vectors,
        residual,
        iterations,
        complete,
    }
}

fn unit_residual(op: &DiscreteOperator, x: &[f64], theta: f64) -> f64 {
    let hx = op.apply(x);
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    hx.iter().zip(x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt() / nrm
}

/// Smallest eigenpairs by block shift-and-invert iteration with Rayleigh-Ritz projection.
pub fn ground_state(op: &DiscreteOperator) -> Result<SpectralSolution> {
    ground_state_with(op, &EigenOptions::default())
}

pub fn ground_state_with(op: &DiscreteOperator, opts: &EigenOptions) -> Result<SpectralSolution> {
    faer::set_global_parallelism(Par::Seq);
    let n = op.n();
    let modes = opts.modes.max(1).min(n);
    let b = opts.block.max(modes + 2).min(n);
    let hm = op.matrix();
    let llt = hm.llt(Side::Lower).map_err(|_| Error::Solver {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let hnorm = op.norm_inf();
    let mut x = Mat::from_fn(n, b, |i, j| {
        if j == 0 {
            1.0
        } else {
            (std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / n as f64).cos()
        }
    });
    let mut worst = f64::INFINITY;
    for it in 1..=opts.max_iter {
        llt.solve_in_place(x.as_mut());
        let q = x.qr().compute_thin_Q();
        let hq = hm * &q;
        let t = q.transpose() * &hq;
        let t = Mat::from_fn(b, b, |i, j| 0.5 * (t[(i, j)] + t[(j, i)]));
        let eig = t.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Solver {
            iterations: it,
            residual: worst,
        })?;
        let w = eig.U();
        let theta: Vec<f64> = (0..b).map(|k| eig.S()[k]).collect();
        x = &q * w;
        let hx = &hq * w;
        worst = 0.0;
        for k in 0..modes {
            let r: f64 = (0..n).map(|i| (hx[(i, k)] - theta[k] * x[(i, k)]).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(r / hnorm);
        }
        if worst < opts.tol {
            let vecs = Mat::from_fn(n, modes, |i, k| x[(i, k)]);
            let res0 = unit_residual(op, vecs.col_as_slice(0), theta[0]) / hnorm;
            return Ok(finish(op, &theta[..modes], vecs, res0, it, modes == n));
        }
    }
    Err(Error::Solver {
        iterations: opts.max_iter,
        residual: worst,
    })
}

/// Every eigenpair from a dense symmetric eigendecomposition.
pub fn dense_spectrum(op: &DiscreteOperator) -> Result<SpectralSolution> {
    faer::set_global_parallelism(Par::Seq);
    let n = op.n();
    let eig = op.matrix().self_adjoint_eigen(Side::Lower).map_err(|_| Error::Solver {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let theta: Vec<f64> = (0..n).map(|k| eig.S()[k]).collect();
    let vecs = eig.U().to_owned();
    let res0 = unit_residual(op, vecs.col_as_slice(0), theta[0]) / op.norm_inf();
    Ok(finish(op, &theta, vecs, res0, 0, true))
}

#[cfg(test)]
mod tests {
    use super::super::operator::assemble;
    use super::*;
    use crate::kernels::{JumpKernelSpec, PotentialSpec};

    #[test]
    fn iteration_matches_dense() {
        let k = JumpKernelSpec::stable(1, 1.0);
        let op = assemble(&k, &PotentialSpec::power(2.0), Grid1D::new(6.0, 151).unwrap()).unwrap();
        let it = ground_state_with(&op, &EigenOptions { modes: 3, ..Default::default() }).unwrap();
        let de = dense_spectrum(&op).unwrap();
        for m in 0..3 {
            assert!((it.eigenvalues[m] - de.eigenvalues[m]).abs() < 1e-8 * de.eigenvalues[m]);
        }
        let diff = it.phi1().iter().zip(de.phi1()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
        assert!(it.positive());
    }
}
