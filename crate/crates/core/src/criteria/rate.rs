use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
}

type LnMap = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Monotone function of `s > 0`, evaluated in log-log coordinates
/// (`ln s ↦ ln f(s)`) so that values like `exp(10^13)` stay representable.
#[derive(Clone)]
pub struct RateFunction {
    ln_map: LnMap,
    ln_inverse: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub monotonicity: Monotonicity,
    /// `(ln s_min, ln s_max)`; `ln s_min` may be `-∞`.
    pub ln_domain: (f64, f64),
    pub label: String,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFunction")
            .field("label", &self.label)
            .field("monotonicity", &self.monotonicity)
            .field("ln_domain", &self.ln_domain)
            .field("closed_inverse", &self.ln_inverse.is_some())
            .finish()
    }
}

pub(crate) const LN_S_MAX: f64 = 700.0;

impl RateFunction {
    pub fn from_ln<F>(label: impl Into<String>, monotonicity: Monotonicity, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        RateFunction {
            ln_map: Arc::new(f),
            ln_inverse: None,
            monotonicity,
            ln_domain: (f64::NEG_INFINITY, LN_S_MAX),
            label: label.into(),
        }
    }

    /// Attaches a closed-form generalized inverse `ln r ↦ ln f^{-1}(r)`.
    pub fn with_inverse<G>(mut self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.ln_inverse = Some(Arc::new(g));
        self
    }

    pub fn with_domain(mut self, ln_lo: f64, ln_hi: f64) -> Self {
        self.ln_domain = (ln_lo, ln_hi);
        self
    }

    /// Builds a rate function from an ordinary evaluator `s ↦ f(s)`.
    pub fn from_fn<F>(label: impl Into<String>, monotonicity: Monotonicity, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_ln(label, monotonicity, move |ln_s| Ok(f(ln_s.exp()).ln()))
    }

    /// Piecewise-linear interpolation of `(s, f)` rows, constant beyond the last row.
    pub fn tabulated(label: impl Into<String>, monotonicity: Monotonicity, rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) || rows[0].0 < 0.0 {
            return Err(Error::param("table needs >= 2 rows with increasing s >= 0"));
        }
        let ok = rows.windows(2).all(|w| match monotonicity {
            Monotonicity::NonDecreasing => w[1].1 >= w[0].1,
            Monotonicity::NonIncreasing => w[1].1 <= w[0].1,
        });
        if !ok {
            return Err(Error::param("table contradicts its monotonicity tag"));
        }
        let hi = rows[rows.len() - 1].0.ln();
        let lo = if rows[0].0 == 0.0 { f64::NEG_INFINITY } else { rows[0].0.ln() };
        Ok(Self::from_fn(label, monotonicity, move |s| {
            let n = rows.len();
            if s <= rows[0].0 {
                return rows[0].1;
            }
            if s >= rows[n - 1].0 {
                return rows[n - 1].1;
            }
            let k = rows.partition_point(|r| r.0 <= s) - 1;
            let ((s0, f0), (s1, f1)) = (rows[k], rows[k + 1]);
            f0 + (f1 - f0) * (s - s0) / (s1 - s0)
        })
        .with_domain(lo, hi))
    }

    /// `ln f(e^{ln_s})`.
    pub fn ln_at(&self, ln_s: f64) -> Result<f64> {
        (self.ln_map)(ln_s.clamp(self.ln_domain.0, self.ln_domain.1))
    }

    pub fn ln_eval(&self, s: f64) -> Result<f64> {
        self.ln_at(s.ln())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(self.ln_eval(s)?.exp())
    }

    pub fn has_closed_inverse(&self) -> bool {
        self.ln_inverse.is_some()
    }
}

// `reached(ln f)`: whether the target has been met at a point.
fn reached(f: &RateFunction, ln_f: f64, ln_r: f64) -> bool {
    match f.monotonicity {
        Monotonicity::NonDecreasing => ln_f >= ln_r,
        Monotonicity::NonIncreasing => ln_f <= ln_r,
    }
}

/// Relative tolerance in `s` of the bisection fallback.
pub const INVERSE_REL_TOL: f64 = 1e-10;

/// `ln` of the generalized inverse: `inf{s ≥ 0 : f(s) ≥ r}` for non-decreasing `f`,
/// `inf{s > 0 : f(s) ≤ r}` for non-increasing `f`; `r = e^{ln_r}`.
/// Returns `-∞` when the infimum is 0.
pub fn gen_inverse_ln(f: &RateFunction, ln_r: f64) -> Result<f64> {
    if let (Some(inv), Monotonicity::NonDecreasing) = (&f.ln_inverse, f.monotonicity) {
        let v = inv(ln_r);
        if v.is_nan() {
            return Err(Error::Domain(format!("inverse undefined at r = e^{ln_r}")));
        }
        return Ok(v.max(f.ln_domain.0));
    }
    let (dlo, dhi) = f.ln_domain;
    if reached(f, f.ln_at(dlo)?, ln_r) {
        return Ok(dlo);
    }
    if !reached(f, f.ln_at(dhi)?, ln_r) {
        return Err(Error::UnboundedInverse { target: ln_r.exp() });
    }
    // bracket: lo unreached, hi reached
    let start = 0.0f64.clamp(dlo.max(-LN_S_MAX), dhi);
    let (mut lo, mut hi);
    if reached(f, f.ln_at(start)?, ln_r) {
        hi = start;
        let mut step = 1.0;
        lo = start - step;
        while lo > dlo.max(-LN_S_MAX) && reached(f, f.ln_at(lo)?, ln_r) {
            hi = lo;
            step *= 2.0;
            lo = (start - step).max(dlo.max(-LN_S_MAX));
        }
        if reached(f, f.ln_at(lo)?, ln_r) {
            return Ok(lo);
        }
    } else {
        lo = start;
        let mut step = 1.0;
        hi = (start + step).min(dhi);
        while !reached(f, f.ln_at(hi)?, ln_r) {
            lo = hi;
            step *= 2.0;
            hi = (start + step).min(dhi);
        }
    }
    while hi - lo > INVERSE_REL_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reached(f, f.ln_at(mid)?, ln_r) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Generalized inverse at `r`.
pub fn gen_inverse(f: &RateFunction, r: f64) -> Result<f64> {
    if r <= 0.0 && f.monotonicity == Monotonicity::NonDecreasing {
        return Ok(0.0);
    }
    Ok(gen_inverse_ln(f, r.ln())?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_and_bisected_agree() {
        let sq = RateFunction::from_fn("s^2", Monotonicity::NonDecreasing, |s| s * s);
        assert!((gen_inverse(&sq, 4.0).unwrap() - 2.0).abs() < 1e-9);
        let closed = sq.clone().with_inverse(|ln_r| ln_r / 2.0);
        assert!((gen_inverse(&closed, 4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_when_already_reached() {
        let f = RateFunction::tabulated("t", Monotonicity::NonDecreasing, vec![(0.0, 3.0), (1.0, 5.0)]).unwrap();
        assert_eq!(gen_inverse(&f, 2.0).unwrap(), 0.0);
        assert!(matches!(gen_inverse(&f, 6.0), Err(Error::UnboundedInverse { .. })));
    }

    #[test]
    fn non_increasing_inverse() {
        let f = RateFunction::from_fn("1/s", Monotonicity::NonIncreasing, |s| 1.0 / s);
        assert!((gen_inverse(&f, 4.0).unwrap() - 0.25).abs() < 1e-10);
    }
}
