use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::operator::Grid1D;

/// Standard `C^∞` bump supported on `(-1, 1)`.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Deterministic RNG for trial `k` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Mollified noise on the grid, supported in `[-support, support]`.
///
/// Normal amplitudes sit on a lattice of spacing `w/2` inside a random window
/// and are smoothed by bumps of width `w ∈ [0.5, 4]`.
pub fn mollified_noise(grid: &Grid1D, support: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: f64 = rng.random_range(0.5..4.0f64).min(support / 2.0);
    let span = 2.0 * support - 2.0 * w;
    let len = rng.random_range(0.0..1.0f64) * span;
    let a = -support + w + rng.random_range(0.0..1.0f64) * (span - len);
    let b = a + len;
    let step = 0.5 * w;
    let m = ((b - a) / step).floor() as usize + 1;
    let centres: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let amp: f64 = rng.sample(StandardNormal);
            (a + k as f64 * step, amp)
        })
        .collect();
    (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            centres.iter().map(|&(c, amp)| amp * bump((x - c) / w)).sum()
        })
        .collect()
}

/// `Σ f_i² h`.
pub fn l2_sq(grid: &Grid1D, f: &[f64]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>() * grid.h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_supported_and_reproducible() {
        let g = Grid1D::new(20.0, 401).unwrap();
        let f = mollified_noise(&g, 10.0, &mut trial_rng(7, 3));
        let f2 = mollified_noise(&g, 10.0, &mut trial_rng(7, 3));
        assert_eq!(f, f2);
        for i in 0..g.n {
            if g.x(i).abs() > 10.0 {
                assert_eq!(f[i], 0.0);
            }
        }
        assert!(f.iter().any(|&v| v != 0.0));
    }
}
