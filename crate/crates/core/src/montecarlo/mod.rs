mod events;
mod paths;
mod sampler;

pub use events::{exit_event_prob, iu_ratio_test, Denominator, ExitEvent, IuRatioReport, IuRatioRow, INCONCLUSIVE_REL_STDERR};
pub use paths::{exit_time_prob, exit_times, feynman_kac, ks_two_sample, ExitTimes};
pub use sampler::{sample_increment, standard_stable, IncrementSampler, SmallJumps, DEFAULT_EPS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::pairwise_sum;

/// Simulation settings shared by the path estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    /// Time horizon.
    pub t: f64,
    /// Step for the potential integral and exit detection.
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    /// Small-jump cutoff for tempered and truncated kernels.
    pub eps: f64,
    pub small_jumps: SmallJumps,
}

impl PathConfig {
    /// Horizon `t` with `Δt = t/100`.
    pub fn new(t: f64, paths: usize, seed: u64) -> Self {
        PathConfig {
            t,
            dt: if t > 0.0 { t / 100.0 } else { 0.01 },
            paths,
            seed,
            eps: DEFAULT_EPS,
            small_jumps: SmallJumps::Gaussian,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_paths(mut self, paths: usize) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of steps covering `[0, t]`.
    pub fn steps(&self) -> Result<usize> {
        self.validate()?;
        Ok(steps_for(self.t, self.dt)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::param("time horizon must be finite and non-negative"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::param("time step must be positive"));
        }
        if self.paths == 0 {
            return Err(Error::param("path count must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::param(format!("small-jump cutoff {} outside (0, 1]", self.eps)));
        }
        steps_for(self.t, self.dt).map(|_| ())
    }

    pub(crate) fn sampler(&self, spec: &crate::kernels::JumpKernelSpec) -> Result<IncrementSampler> {
        IncrementSampler::with_small_jumps(spec, self.eps, self.small_jumps)
    }

    /// RNG of path `k`.
    pub(crate) fn rng(&self, k: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        rng
    }
}

pub(crate) fn steps_for(t: f64, dt: f64) -> Result<usize> {
    let m = (t / dt).round();
    if (m * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(Error::param(format!("time step {dt} does not divide {t}")));
    }
    Ok(m as usize)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FKEstimate {
    pub value: f64,
    /// Sample standard deviation over `√N`.
    pub stderr: f64,
    pub n: usize,
    pub bias_notes: Vec<String>,
}

impl FKEstimate {
    pub fn from_samples(samples: &[f64], bias_notes: Vec<String>) -> Self {
        let n = samples.len();
        let mean = pairwise_sum(samples) / n as f64;
        let dev: Vec<f64> = samples.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        FKEstimate {
            value: mean,
            stderr: (var / n as f64).sqrt(),
            n,
            bias_notes,
        }
    }

    pub fn exact(value: f64, n: usize, bias_notes: Vec<String>) -> Self {
        FKEstimate {
            value,
            stderr: 0.0,
            n,
            bias_notes,
        }
    }

    /// `value - k·stderr`.
    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.stderr
    }

    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.value.abs()
    }
}
