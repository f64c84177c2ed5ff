use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    NonIncreasing,
    NonDecreasing,
}

/// Interval `[lo, hi]` of radii on which a tabulated profile is declared monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    pub lo: f64,
    pub hi: f64,
    pub direction: Monotone,
}

/// Tabulated radial profile, log-log linear between knots and power-law
/// extrapolated outside them.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    knots: Vec<(f64, f64)>,
    segments: Vec<MonotoneSegment>,
}

impl RadialProfile {
    pub fn new(knots: Vec<(f64, f64)>, mut segments: Vec<MonotoneSegment>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::param("radial profile needs at least two knots"));
        }
        for w in knots.windows(2) {
            if !(w[0].0 > 0.0 && w[1].0 > w[0].0) {
                return Err(Error::param("profile knots must be positive and strictly increasing"));
            }
        }
        if knots.iter().any(|k| !(k.1 > 0.0 && k.1.is_finite())) {
            return Err(Error::param("profile values must be positive and finite"));
        }
        if segments.is_empty() {
            return Err(Error::param("profile needs at least one monotone segment"));
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let p = RadialProfile { knots, segments };
        for seg in &p.segments {
            if !(seg.lo >= 0.0 && seg.hi > seg.lo) {
                return Err(Error::param("segment bounds must satisfy 0 <= lo < hi"));
            }
            // The data must honour the declaration at the knots and at the segment ends.
            let mut pts: Vec<f64> = p
                .knots
                .iter()
                .map(|k| k.0)
                .filter(|&u| u > seg.lo && u < seg.hi)
                .collect();
            if seg.lo > 0.0 {
                pts.insert(0, seg.lo);
            }
            if seg.hi.is_finite() {
                pts.push(seg.hi);
            }
            for w in pts.windows(2) {
                let (a, b) = (p.eval(w[0]), p.eval(w[1]));
                let ok = match seg.direction {
                    Monotone::NonIncreasing => b <= a * (1.0 + 1e-12),
                    Monotone::NonDecreasing => b >= a * (1.0 - 1e-12),
                };
                if !ok {
                    return Err(Error::param(format!(
                        "profile is not {:?} on [{}, {}]",
                        seg.direction, seg.lo, seg.hi
                    )));
                }
            }
            let (first, last) = (p.slope(0), p.slope(p.knots.len() - 2));
            let bad_left = seg.lo < p.knots[0].0
                && match seg.direction {
                    Monotone::NonIncreasing => first > 0.0,
                    Monotone::NonDecreasing => first < 0.0,
                };
            let bad_right = seg.hi > p.knots[p.knots.len() - 1].0
                && match seg.direction {
                    Monotone::NonIncreasing => last > 0.0,
                    Monotone::NonDecreasing => last < 0.0,
                };
            if bad_left || bad_right {
                return Err(Error::param("profile extrapolation contradicts a declared segment"));
            }
        }
        Ok(p)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn segments(&self) -> &[MonotoneSegment] {
        &self.segments
    }

    // log-log slope of piece k (between knots k and k+1)
    fn slope(&self, k: usize) -> f64 {
        let (u0, r0) = self.knots[k];
        let (u1, r1) = self.knots[k + 1];
        (r1 / r0).ln() / (u1 / u0).ln()
    }

    fn piece(&self, u: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.0.total_cmp(&u)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Log-log slope at the origin and at infinity.
    pub fn end_slopes(&self) -> (f64, f64) {
        (self.slope(0), self.slope(self.knots.len() - 2))
    }

    pub fn ln_eval(&self, ln_u: f64) -> f64 {
        let u = ln_u.exp();
        let k = if u.is_finite() { self.piece(u) } else { self.knots.len() - 2 };
        let (u0, r0) = self.knots[k];
        r0.ln() + self.slope(k) * (ln_u - u0.ln())
    }

    pub fn eval(&self, u: f64) -> f64 {
        let k = self.piece(u);
        let (u0, r0) = self.knots[k];
        r0 * (u / u0).powf(self.slope(k))
    }

    /// `∫_a^b u^k ρ(u) du` (closed form on each power-law piece).
    pub fn moment(&self, k: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = self.knots.len();
        let mut total = 0.0;
        // piece boundaries: (0, u_1], [u_1, u_2], ..., [u_{n-2}, ∞)
        for p in 0..n - 1 {
            let lo = if p == 0 { 0.0 } else { self.knots[p].0 };
            let hi = if p == n - 2 { f64::INFINITY } else { self.knots[p + 1].0 };
            let (x0, x1) = (a.max(lo), b.min(hi));
            if x1 <= x0 {
                continue;
            }
            let (u0, r0) = self.knots[p];
            let e = self.slope(p) + k;
            let scale = r0 * u0.powf(-self.slope(p));
            total += scale * power_integral(e, x0, x1);
        }
        total
    }

    /// Infimum of the profile over `[a, b]` from the declared segments.
    pub fn ln_inf(&self, a: f64, b: f64) -> Result<f64> {
        let mut covered_to = a;
        let mut best = f64::INFINITY;
        for seg in &self.segments {
            if seg.hi < a || seg.lo > b {
                continue;
            }
            if seg.lo > covered_to {
                break;
            }
            let lo = seg.lo.max(a);
            let hi = seg.hi.min(b);
            let v = match seg.direction {
                Monotone::NonIncreasing => {
                    if hi.is_finite() {
                        self.ln_eval(hi.ln())
                    } else if self.end_slopes().1 < 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        self.ln_eval(self.knots[self.knots.len() - 1].0.ln())
                    }
                }
                Monotone::NonDecreasing => {
                    if lo > 0.0 {
                        self.ln_eval(lo.ln())
                    } else if self.end_slopes().0 > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        self.ln_eval(self.knots[0].0.ln())
                    }
                }
            };
            best = best.min(v);
            covered_to = covered_to.max(seg.hi);
        }
        if covered_to < b {
            return Err(Error::NotAvailable(format!(
                "no declared monotone segment covers radii in [{covered_to}, {b}]"
            )));
        }
        Ok(best)
    }
}

/// `∫_a^b u^e du` for `0 ≤ a < b ≤ ∞`; infinite when divergent.
pub(crate) fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if (e + 1.0).abs() < 1e-14 {
        if a <= 0.0 || !b.is_finite() {
            return f64::INFINITY;
        }
        return (b / a).ln();
    }
    let p = e + 1.0;
    let fa = if a <= 0.0 {
        if p > 0.0 {
            0.0
        } else {
            return f64::INFINITY;
        }
    } else {
        a.powf(p)
    };
    let fb = if !b.is_finite() {
        if p < 0.0 {
            0.0
        } else {
            return f64::INFINITY;
        }
    } else {
        b.powf(p)
    };
    (fb - fa) / p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decreasing() -> RadialProfile {
        RadialProfile::new(
            vec![(0.5, 8.0), (1.0, 1.0), (2.0, 0.25), (4.0, 0.01)],
            vec![MonotoneSegment {
                lo: 0.0,
                hi: f64::INFINITY,
                direction: Monotone::NonIncreasing,
            }],
        )
        .unwrap()
    }

    #[test]
    fn interpolates_log_log() {
        let p = decreasing();
        assert!((p.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((p.eval(2.0f64.sqrt()) - 0.5).abs() < 1e-14);
        // extrapolation below the first knot keeps the first slope (-3)
        assert!((p.eval(0.25) - 64.0).abs() < 1e-10);
    }

    #[test]
    fn moment_matches_quadrature() {
        let p = decreasing();
        let q = crate::quad::integrate(|u| u * u * p.eval(u), 0.3, 3.0, 1e-13, 1e-13);
        assert!((p.moment(2.0, 0.3, 3.0) - q.value).abs() < 1e-10);
    }

    #[test]
    fn rejects_false_declaration() {
        let r = RadialProfile::new(
            vec![(1.0, 1.0), (2.0, 2.0)],
            vec![MonotoneSegment {
                lo: 0.0,
                hi: 3.0,
                direction: Monotone::NonIncreasing,
            }],
        );
        assert!(r.is_err());
    }

    #[test]
    fn infimum_over_segments() {
        let p = RadialProfile::new(
            vec![(1.0, 1.0), (2.0, 4.0), (3.0, 0.5)],
            vec![
                MonotoneSegment { lo: 1.0, hi: 2.0, direction: Monotone::NonDecreasing },
                MonotoneSegment { lo: 2.0, hi: 3.0, direction: Monotone::NonIncreasing },
            ],
        )
        .unwrap();
        let v = p.ln_inf(1.5, 3.0).unwrap().exp();
        assert!((v - 0.5).abs() < 1e-14);
        let v = p.ln_inf(1.2, 2.2).unwrap().exp();
        assert!((v - p.eval(1.2)).abs() < 1e-14);
        assert!(p.ln_inf(0.5, 2.0).is_err());
    }
}
