use super::rate::RateFunction;
use crate::error::{Error, Result};

/// Fit window for `s`.
pub const FIT_S_MIN: f64 = 1e-6;
pub const FIT_S_MAX: f64 = 1e-1;
pub const FIT_POINTS: usize = 64;

const P_MIN: f64 = 0.01;
const P_MAX: f64 = 4.0;
const P_STEP: f64 = 0.005;

/// Result of fitting `ln f(s) ≈ a s^{-p} + b ln(1/s) + c` on the fit window.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub p: f64,
    pub r_squared: f64,
    /// The model does not describe the samples (relative RMS above 1e-3 or `a ≤ 0`).
    pub curvature: bool,
    /// `f` does not grow as `s → 0`.
    pub bounded: bool,
    /// `f` grows only polynomially (`ln f` affine in `ln(1/s)`).
    pub polynomial: bool,
    pub amplitude: f64,
    pub log_coefficient: f64,
    pub offset: f64,
    /// RMS residual relative to the spread of `ln f`.
    pub relative_rms: f64,
    /// `(s, ln f(s))` samples, `s` increasing.
    pub samples: Vec<(f64, f64)>,
}

pub fn fit_grid() -> Vec<f64> {
    let (a, b) = (FIT_S_MIN.ln(), FIT_S_MAX.ln());
    (0..FIT_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (FIT_POINTS - 1) as f64).exp())
        .collect()
}

// least squares on the given columns; returns (coefficients, rss)
fn lsq(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let k = cols.len();
    let m = y.len();
    // modified Gram-Schmidt on column-scaled data
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .collect();
    let mut q: Vec<Vec<f64>> = cols.iter().zip(&scales).map(|(c, s)| c.iter().map(|v| v / s).collect()).collect();
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        for i in 0..j {
            let dot: f64 = (0..m).map(|t| q[i][t] * q[j][t]).sum();
            r[i][j] = dot;
            for t in 0..m {
                q[j][t] -= dot * q[i][t];
            }
        }
        let nrm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = nrm;
        if nrm > 1e-14 {
            for v in q[j].iter_mut() {
                *v /= nrm;
            }
        }
    }
    let qty: Vec<f64> = (0..k).map(|j| (0..m).map(|t| q[j][t] * y[t]).sum()).collect();
    let mut x = vec![0.0; k];
    for j in (0..k).rev() {
        if r[j][j] <= 1e-14 {
            x[j] = 0.0;
            continue;
        }
        let mut v = qty[j];
        for i in j + 1..k {
            v -= r[j][i] * x[i];
        }
        x[j] = v / r[j][j];
    }
    for j in 0..k {
        x[j] /= scales[j];
    }
    let rss = (0..m)
        .map(|t| {
            let fit: f64 = (0..k).map(|j| x[j] * cols[j][t]).sum();
            (y[t] - fit).powi(2)
        })
        .sum();
    (x, rss)
}

fn profile(p: f64, u: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: Vec<f64> = u.iter().map(|&v| (p * (v - umax)).exp()).collect();
    let (mut x, rss) = lsq(&[z, u.to_vec(), vec![1.0; u.len()]], y);
    x[0] *= (-p * umax).exp();
    (x, rss)
}

/// Fits the growth exponent of a non-increasing rate function near 0.
pub fn asymptotic_exponent(f: &RateFunction) -> Result<ExponentFit> {
    let grid = fit_grid();
    let mut y = Vec::with_capacity(grid.len());
    for &s in &grid {
        let v = f.ln_eval(s)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("rate function is not finite at s = {s:e}")));
        }
        y.push(v);
    }
    fit_samples(&grid, &y)
}

/// Exponent fit on explicit `(s, ln f(s))` samples.
pub fn fit_samples(s: &[f64], y: &[f64]) -> Result<ExponentFit> {
    if s.len() != y.len() || s.len() < 8 {
        return Err(Error::param("exponent fit needs at least 8 matching samples"));
    }
    let samples: Vec<(f64, f64)> = s.iter().cloned().zip(y.iter().cloned()).collect();
    let u: Vec<f64> = s.iter().map(|v| -v.ln()).collect();
    let m = y.len() as f64;
    let mean = y.iter().sum::<f64>() / m;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = ymax - ymin;
    let base = ExponentFit {
        p: 0.0,
        r_squared: 1.0,
        curvature: false,
        bounded: false,
        polynomial: false,
        amplitude: 0.0,
        log_coefficient: 0.0,
        offset: 0.0,
        relative_rms: 0.0,
        samples,
    };
    if spread <= 1e-9 * (1.0 + ymax.abs()) {
        return Ok(ExponentFit { bounded: true, ..base });
    }
    let (x0, rss0) = lsq(&[u.clone(), vec![1.0; u.len()]], y);
    let rel0 = (rss0 / m).sqrt() / spread;
    if rel0 < 1e-8 {
        return Ok(ExponentFit {
            polynomial: true,
            log_coefficient: x0[0],
            offset: x0[1],
            r_squared: 1.0 - rss0 / tss,
            relative_rms: rel0,
            ..base
        });
    }
    let n_steps = ((P_MAX - P_MIN) / P_STEP).round() as usize;
    let mut best = (f64::INFINITY, P_MIN);
    for i in 0..=n_steps {
        let p = P_MIN + P_STEP * i as f64;
        let (_, rss) = profile(p, &u, y);
        if rss < best.0 {
            best = (rss, p);
        }
    }
    let g = 0.618_033_988_749_894_9;
    let (mut a, mut b) = ((best.1 - P_STEP).max(P_MIN), (best.1 + P_STEP).min(P_MAX));
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = profile(c, &u, y).1;
    let mut fd = profile(d, &u, y).1;
    while b - a > 1e-9 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = profile(c, &u, y).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = profile(d, &u, y).1;
        }
    }
    let p = if fc.min(fd) < best.0 { 0.5 * (a + b) } else { best.1 };
    let (x, rss) = profile(p, &u, y);
    let rel = (rss / m).sqrt() / spread;
    let at_edge = p <= P_MIN + P_STEP || p >= P_MAX - P_STEP;
    Ok(ExponentFit {
        p,
        r_squared: 1.0 - rss / tss,
        curvature: rel > 1e-3 || x[0] <= 0.0 || at_edge,
        amplitude: x[0],
        log_coefficient: x[1],
        offset: x[2],
        relative_rms: rel,
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::super::rate::Monotonicity;
    use super::*;

    fn exp_rate(c: f64, p: f64, shift: f64) -> RateFunction {
        RateFunction::from_ln("t", Monotonicity::NonIncreasing, move |ln_s| Ok(shift + c * (-p * ln_s).exp()))
    }

    #[test]
    fn exact_power_classes() {
        let f = asymptotic_exponent(&exp_rate(1.0, 0.5, 1.0)).unwrap();
        assert!((f.p - 0.5).abs() < 1e-6 && !f.curvature, "{f:?}");
        let f = asymptotic_exponent(&exp_rate(1.0, 1.0, 0.0)).unwrap();
        assert!((f.p - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounded_and_polynomial() {
        let f = asymptotic_exponent(&RateFunction::from_fn("c", Monotonicity::NonIncreasing, |_| 3.0)).unwrap();
        assert!(f.bounded && f.p == 0.0);
        let f = asymptotic_exponent(&RateFunction::from_fn("poly", Monotonicity::NonIncreasing, |s| s.powf(-2.0)))
            .unwrap();
        assert!(f.polynomial && (f.log_coefficient - 2.0).abs() < 1e-9);
    }
}
