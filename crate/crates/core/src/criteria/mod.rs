//! Rate functions and the contractivity classifier.

mod alpha;
mod exponent;
mod rate;
mod rates;
mod verdict;

pub use alpha::{alpha_rs, ln_alpha_rs, AlphaValue, ConstantWeight, PhiWeight, ScaledWeight, Weight};
pub use exponent::{asymptotic_exponent, fit_grid, fit_samples, ExponentFit, FIT_POINTS, FIT_S_MAX, FIT_S_MIN};
pub use rate::{gen_inverse, gen_inverse_ln, Monotonicity, RateFunction, INVERSE_REL_TOL};
pub use rates::{beta_hat_rate, beta_rate, big_phi, irregular_rates, Deltas, IrregularRates};
pub use verdict::{
    classify, classify_with, contractivity_tests, ClassifyOptions, ContractivityVerdict, Diagnostics, Flag, Flags,
    Route, ScanEntry, TestPath, BOUNDARY_BAND, DELTA_SCAN, TAIL_CUTOFF,
};
