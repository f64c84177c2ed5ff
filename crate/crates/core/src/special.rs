//! Small numerical helpers shared by the engines.

use statrs::function::gamma::{gamma, gamma_ur, ln_gamma};
use std::f64::consts::PI;

/// `ln(exp(ln_a) + b)` without overflowing for huge `ln_a`.
pub fn ln_add(ln_a: f64, b: f64) -> f64 {
    if ln_a == f64::INFINITY {
        return ln_a;
    }
    if ln_a > 30.0 {
        ln_a + (b * (-ln_a).exp()).ln_1p()
    } else {
        (ln_a.exp() + b).ln()
    }
}

/// `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(e^y - 1)` for `y > 0`.
pub fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    ln_unit_ball_volume(d).exp()
}

pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// Surface area of the unit sphere in `R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Upper incomplete gamma `Γ(s, x)`, accepting `x = 0` and `x = ∞`.
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        gamma(s)
    } else if !x.is_finite() {
        0.0
    } else {
        gamma_ur(s, x) * gamma(s)
    }
}

/// Regularized upper incomplete gamma `Q(s, x)` with the same conventions.
pub fn upper_gamma_regularized(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if !x.is_finite() {
        0.0
    } else {
        gamma_ur(s, x)
    }
}

/// `Σ_{k ≥ m} k^{-q}` for `q > 1`, `m ≥ 1`.
pub fn power_tail_sum(q: f64, m: u64) -> f64 {
    assert!(q > 1.0 && m >= 1);
    const DIRECT: u64 = 64;
    let mut s = 0.0;
    for k in m..m + DIRECT {
        s += (k as f64).powf(-q);
    }
    let big_m = (m + DIRECT) as f64;
    // Euler-Maclaurin remainder for Σ_{k ≥ M} k^{-q}.
    s += big_m.powf(1.0 - q) / (q - 1.0) + 0.5 * big_m.powf(-q) + q * big_m.powf(-q - 1.0) / 12.0
        - q * (q + 1.0) * (q + 2.0) * big_m.powf(-q - 3.0) / 720.0;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two() {
        assert!((power_tail_sum(2.0, 1) - PI * PI / 6.0).abs() < 1e-13);
        let direct: f64 = (5..2_000_000u64).map(|k| (k as f64).powf(-3.0)).sum();
        assert!((power_tail_sum(3.0, 5) - direct).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn log_helpers() {
        assert!((ln_add(2.0f64.ln(), 3.0) - 5.0f64.ln()).abs() < 1e-15);
        assert_eq!(ln_add(1e13, 1.5), 1e13);
        assert!((softplus(0.0) - 2.0f64.ln()).abs() < 1e-15);
        assert!((ln_expm1(1.0) - (1.0f64.exp() - 1.0).ln()).abs() < 1e-15);
        assert!((log_add_exp(1.0, 2.0) - (1.0f64.exp() + 2.0f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn incomplete_gamma_edges() {
        assert!((upper_gamma(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(upper_gamma(2.0, f64::INFINITY), 0.0);
        assert!((upper_gamma(2.0, 0.0) - 1.0).abs() < 1e-14);
    }
}
