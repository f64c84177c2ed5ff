//! One-dimensional discretization of `D^V` and numerical checks of the ground-state estimates.

mod checks;
mod eigen;
mod heat;
mod operator;
mod testfn;

pub use checks::{
    g_n, generator, gn_probe, ground_state_envelope, groundstate_bounds_check, lyapunov_check, lyapunov_function,
    schrodinger_side, sobolev_check, sobolev_ratio, super_poincare_check, super_poincare_ratio, weighted_form,
    EnvelopeRange, GnProbe, GnRow, GroundStateBounds, LyapunovReport, SobolevReport, SuperPoincareReport,
};
pub use eigen::{dense_spectrum, ground_state, ground_state_with, EigenOptions, SpectralSolution};
pub use heat::{heat_kernel, iu_ratio, iu_trend, HeatKernelMatrix, IuRatio, IuTrend, IuTrendRow, MAX_TRUNCATION_FRACTION};
pub use operator::{assemble, neighbour_weight, DiscreteOperator, Grid1D};
pub use testfn::{bump, l2_sq, mollified_noise, trial_rng};
