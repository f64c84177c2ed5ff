use crate::error::{Error, Result};
use crate::special::{ln_add, ln_unit_ball_volume, power_tail_sum, softplus, unit_ball_volume};

use super::kernel::norm;

/// Region where an irregular potential stays at a fixed low level.
#[derive(Debug, Clone, PartialEq)]
pub enum ExceptionalSet {
    /// Balls centred on the positive first axis at `|x_m| = e^{m^{k0}}` with radii
    /// `r_m = m^{-k0/α + 1/d}`, `m ≥ 1`.
    BallUnion { k0: f64, alpha: f64, dim: usize },
    /// Only the tail bound `|A ∩ B(0,R)^c| ≤ c log^{-θ}(1+R)` is known.
    Envelope { c: f64, theta: f64 },
}

impl ExceptionalSet {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExceptionalSet::BallUnion { k0, alpha, dim } => {
                if dim == 0 || !(alpha > 0.0 && alpha < 2.0) || !(k0 > 0.0) {
                    return Err(Error::param("ball union needs k0 > 0, alpha in (0,2), d >= 1"));
                }
                if k0 / alpha <= 1.0 / dim as f64 {
                    return Err(Error::param("ball union radii must decrease: need k0/alpha > 1/d"));
                }
            }
            ExceptionalSet::Envelope { c, theta } => {
                if !(c > 0.0 && theta > 0.0) {
                    return Err(Error::param("envelope needs c > 0 and theta > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn ball_center(&self, m: u64) -> f64 {
        match *self {
            ExceptionalSet::BallUnion { k0, .. } => (m as f64).powf(k0).exp(),
            ExceptionalSet::Envelope { .. } => f64::NAN,
        }
    }

    pub fn ball_radius(&self, m: u64) -> f64 {
        match *self {
            ExceptionalSet::BallUnion { k0, alpha, dim } => (m as f64).powf(-k0 / alpha + 1.0 / dim as f64),
            ExceptionalSet::Envelope { .. } => f64::NAN,
        }
    }

    /// Membership; an envelope-only set has no geometry and contains nothing.
    pub fn contains(&self, x: &[f64]) -> bool {
        let ExceptionalSet::BallUnion { k0, .. } = *self else {
            return false;
        };
        let r = norm(x);
        if r < 1.0 {
            return false;
        }
        let m0 = r.ln().max(0.0).powf(1.0 / k0).round() as u64;
        for m in m0.saturating_sub(1).max(1)..=m0 + 1 {
            let c = self.ball_center(m);
            let rad = self.ball_radius(m);
            let d2: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 { (v - c).powi(2) } else { v * v })
                .sum();
            if d2 < rad * rad {
                return true;
            }
        }
        false
    }

    /// Exponent `q` with `ω_d r_m^d = ω_d m^{-q}`.
    fn ball_exponent(&self) -> Option<(f64, usize)> {
        match *self {
            ExceptionalSet::BallUnion { k0, alpha, dim } => Some((dim as f64 * k0 / alpha - 1.0, dim)),
            _ => None,
        }
    }

    /// Total volume; `None` when infinite.
    pub fn total_measure(&self) -> Option<f64> {
        match self.ball_exponent() {
            Some((q, d)) => (q > 1.0).then(|| unit_ball_volume(d) * power_tail_sum(q, 1)),
            None => None,
        }
    }

    /// `ln |A ∩ B(0,R)^c|` (upper bound for the envelope), `R` given by its logarithm.
    ///
    /// A ball is counted in full once it reaches beyond radius `R`.
    pub fn ln_tail_measure(&self, ln_r: f64) -> f64 {
        match *self {
            ExceptionalSet::Envelope { c, theta } => c.ln() - theta * softplus(ln_r).ln(),
            ExceptionalSet::BallUnion { k0, .. } => {
                let (q, d) = self.ball_exponent().expect("ball union");
                if q <= 1.0 {
                    return f64::INFINITY;
                }
                if ln_r > 1e15f64.powf(k0) {
                    // Σ_{k≥m} k^{-q} ≈ m^{1-q}/(q-1) with m = (ln R)^{1/k0}
                    return ln_unit_ball_volume(d) + (1.0 - q) * ln_r.ln() / k0 - (q - 1.0).ln();
                }
                // first m whose ball reaches beyond R
                let mut m = if ln_r <= 0.0 {
                    1
                } else {
                    (ln_r.powf(1.0 / k0).floor() as u64).saturating_sub(1).max(1)
                };
                while m < u64::MAX / 2 {
                    let ln_c = (m as f64).powf(k0);
                    let reach = ln_add(ln_c, self.ball_radius(m));
                    if reach > ln_r {
                        break;
                    }
                    m += 1;
                }
                ln_unit_ball_volume(d) + power_tail_sum(q, m).ln()
            }
        }
    }

    pub fn tail_measure(&self, r: f64) -> f64 {
        self.ln_tail_measure(r.ln()).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    Zero,
    Power { lambda: f64 },
    LogPower { lambda: f64 },
    /// `level` on the exceptional set, `log^λ(1+|x|)` elsewhere; `threshold` is `K`.
    Irregular {
        lambda: f64,
        set: ExceptionalSet,
        level: f64,
        threshold: f64,
    },
    /// Radial table `(r, V)` with `r` increasing from 0; linear between knots,
    /// continued with the last slope.
    Custom { table: Vec<(f64, f64)> },
}

/// Non-negative potential `V(x) = base(x) + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    pub offset: f64,
}

impl PotentialSpec {
    pub fn new(family: PotentialFamily) -> Self {
        PotentialSpec { family, offset: 0.0 }
    }

    pub fn zero() -> Self {
        Self::new(PotentialFamily::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self::zero().shifted(c)
    }

    pub fn power(lambda: f64) -> Self {
        Self::new(PotentialFamily::Power { lambda })
    }

    pub fn logpower(lambda: f64) -> Self {
        Self::new(PotentialFamily::LogPower { lambda })
    }

    pub fn irregular(lambda: f64, set: ExceptionalSet, level: f64, threshold: f64) -> Self {
        Self::new(PotentialFamily::Irregular {
            lambda,
            set,
            level,
            threshold,
        })
    }

    pub fn shifted(mut self, c: f64) -> Self {
        self.offset += c;
        self
    }

    pub fn is_irregular(&self) -> bool {
        matches!(self.family, PotentialFamily::Irregular { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(Error::param("potential offset must be finite and non-negative"));
        }
        match &self.family {
            PotentialFamily::Zero => {}
            PotentialFamily::Power { lambda } | PotentialFamily::LogPower { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::param("lambda must be positive"));
                }
            }
            PotentialFamily::Irregular {
                lambda,
                set,
                level,
                threshold,
            } => {
                if !(*lambda > 0.0) {
                    return Err(Error::param("lambda must be positive"));
                }
                if !(*level >= 0.0 && level.is_finite()) {
                    return Err(Error::param("level must be finite and non-negative"));
                }
                if !(*threshold > 0.0) {
                    return Err(Error::param("threshold K must be positive"));
                }
                set.validate()?;
            }
            PotentialFamily::Custom { table } => {
                if table.len() < 2 || table[0].0 != 0.0 {
                    return Err(Error::param("potential table needs >= 2 rows starting at r = 0"));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::param("potential table radii must increase"));
                }
                if table.iter().any(|r| !(r.1 >= 0.0 && r.1.is_finite())) {
                    return Err(Error::param("potential table values must be finite and >= 0"));
                }
                let n = table.len();
                if table[n - 1].1 < table[n - 2].1 {
                    return Err(Error::param("potential table must not decrease in its last row"));
                }
            }
        }
        Ok(())
    }

    /// The same potential with `inf V = 0`.
    pub fn normalized(&self) -> PotentialSpec {
        let mut p = self.clone();
        p.offset = 0.0;
        if let PotentialFamily::Custom { table } = &mut p.family {
            let m = table.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            for r in table.iter_mut() {
                r.1 -= m;
            }
        }
        p
    }

    /// Radial base branch (ignores the exceptional set), without offset.
    pub fn base_radial(&self, r: f64) -> f64 {
        match &self.family {
            PotentialFamily::Zero => 0.0,
            PotentialFamily::Power { lambda } => r.powf(*lambda),
            PotentialFamily::LogPower { lambda } | PotentialFamily::Irregular { lambda, .. } => {
                r.ln_1p().powf(*lambda)
            }
            PotentialFamily::Custom { table } => table_eval(table, r),
        }
    }

    /// `V(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        if let PotentialFamily::Irregular { set, level, .. } = &self.family {
            if set.contains(x) {
                return level + self.offset;
            }
        }
        self.base_radial(norm(x)) + self.offset
    }

    pub fn value_1d(&self, x: f64) -> f64 {
        self.value(&[x])
    }

    /// Radial upper envelope of `V*` used in log-space rate computations.
    /// For irregular families the level is included, which only matters near the origin.
    pub fn ln_one_plus_vstar(&self, ln_r: f64) -> f64 {
        let o = self.offset;
        match &self.family {
            PotentialFamily::Zero => o.ln_1p(),
            PotentialFamily::Power { lambda } => {
                let ln_v = lambda * ln_add(ln_r, 1.0);
                ln_add(ln_v, 1.0 + o)
            }
            PotentialFamily::LogPower { lambda } => {
                let ln_v = lambda * ln_add(ln_r, 2.0).ln();
                ln_add(ln_v, 1.0 + o)
            }
            PotentialFamily::Irregular { lambda, level, .. } => {
                let ln_v = lambda * ln_add(ln_r, 2.0).ln();
                ln_add(ln_v.max(level.ln()), 1.0 + o)
            }
            PotentialFamily::Custom { .. } => (1.0 + self.vstar_radial(ln_r.exp())).ln(),
        }
    }

    fn vstar_radial(&self, r: f64) -> f64 {
        let (lo, hi) = ((r - 1.0).max(0.0), r + 1.0);
        let o = self.offset;
        match &self.family {
            PotentialFamily::Zero => o,
            PotentialFamily::Power { lambda } => (r + 1.0).powf(*lambda) + o,
            PotentialFamily::LogPower { lambda } | PotentialFamily::Irregular { lambda, .. } => {
                (2.0 + r).ln().powf(*lambda) + o
            }
            PotentialFamily::Custom { table } => {
                let mut m = table_eval(table, lo).max(table_eval(table, hi));
                for &(u, v) in table.iter() {
                    if u > lo && u < hi {
                        m = m.max(v);
                    }
                }
                m + o
            }
        }
    }

    /// `sup_{z ∈ B(x,1)} V(z)`.
    pub fn vstar(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        let closed = self.vstar_radial(r);
        let PotentialFamily::Irregular { .. } = &self.family else {
            return closed;
        };
        closed.max(self.sampled_ball_max(x))
    }

    // brute-force maximum over 200 points of the closed unit ball around x
    fn sampled_ball_max(&self, x: &[f64]) -> f64 {
        let d = x.len();
        const SAMPLES: usize = 200;
        let mut best = f64::NEG_INFINITY;
        let mut z = x.to_vec();
        if d == 1 {
            for i in 0..SAMPLES {
                z[0] = x[0] - 1.0 + 2.0 * i as f64 / (SAMPLES - 1) as f64;
                best = best.max(self.value(&z));
            }
            return best;
        }
        let per_axis = SAMPLES / (2 * d);
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                for i in 0..per_axis {
                    z.copy_from_slice(x);
                    z[axis] += sign * (i + 1) as f64 / per_axis as f64;
                    best = best.max(self.value(&z));
                }
            }
        }
        best.max(self.value(x))
    }

    /// Volume of `{V ≤ r}`; `None` when infinite.
    pub fn sublevel_measure(&self, r: f64, dim: usize) -> Option<f64> {
        let w = unit_ball_volume(dim);
        let level = r - self.offset;
        if level < 0.0 {
            return Some(0.0);
        }
        let d = dim as i32;
        match &self.family {
            PotentialFamily::Zero => None,
            PotentialFamily::Power { lambda } => Some(w * level.powf(1.0 / lambda).powi(d)),
            PotentialFamily::LogPower { lambda } => Some(w * level.powf(1.0 / lambda).exp_m1().powi(d)),
            PotentialFamily::Irregular { lambda, set, level: a_level, .. } => {
                let base = w * level.powf(1.0 / lambda).exp_m1().powi(d);
                if *a_level <= level {
                    match set {
                        ExceptionalSet::BallUnion { .. } => set.total_measure().map(|m| base + m),
                        // the envelope bounds every tail beyond a positive radius
                        ExceptionalSet::Envelope { .. } => Some(base + set.tail_measure(1.0) + w),
                    }
                } else {
                    Some(base)
                }
            }
            PotentialFamily::Custom { table } => {
                let n = table.len();
                let slope = (table[n - 1].1 - table[n - 2].1) / (table[n - 1].0 - table[n - 2].0);
                if slope <= 0.0 && table[n - 1].1 <= level {
                    return None;
                }
                // largest radius with V ≤ level
                let mut rmax = 0.0;
                for wdw in table.windows(2) {
                    let ((r0, v0), (r1, v1)) = (wdw[0], wdw[1]);
                    if v0 <= level {
                        rmax = r0;
                    }
                    if v1 <= level {
                        rmax = r1;
                    } else if v0 <= level {
                        rmax = r0 + (level - v0) / (v1 - v0) * (r1 - r0);
                    }
                }
                if table[n - 1].1 <= level {
                    rmax = table[n - 1].0 + (level - table[n - 1].1) / slope;
                }
                Some(w * f64::powi(rmax, d))
            }
        }
    }

    /// Whether `V(x) → ∞` as `|x| → ∞` along the base branch.
    pub fn grows_unboundedly(&self) -> bool {
        match &self.family {
            PotentialFamily::Zero => false,
            PotentialFamily::Power { .. } | PotentialFamily::LogPower { .. } => true,
            PotentialFamily::Irregular { .. } => false,
            PotentialFamily::Custom { table } => {
                let n = table.len();
                table[n - 1].1 > table[n - 2].1
            }
        }
    }
}

fn table_eval(table: &[(f64, f64)], r: f64) -> f64 {
    let n = table.len();
    let k = match table.binary_search_by(|t| t.0.total_cmp(&r)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let ((r0, v0), (r1, v1)) = (table[k], table[k + 1]);
    (v0 + (v1 - v0) * (r - r0) / (r1 - r0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vstar_closed_forms() {
        assert_eq!(PotentialSpec::power(2.0).vstar(&[3.0]), 16.0);
        assert!((PotentialSpec::logpower(1.0).vstar(&[0.0]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ball_union_membership_and_tail() {
        let set = ExceptionalSet::BallUnion {
            k0: 2.0,
            alpha: 0.5,
            dim: 1,
        };
        let c2 = set.ball_center(2);
        assert!(set.contains(&[c2]));
        assert!(!set.contains(&[-c2]));
        assert!(!set.contains(&[c2 + 1.0]));
        // r_m = m^{-3}, volume 2 m^{-3}; q = 3
        let m3 = set.tail_measure(c2 + 0.5);
        let direct: f64 = (3..200_000u64).map(|k| 2.0 * (k as f64).powf(-3.0)).sum();
        assert!((m3 - direct).abs() < 1e-9);
    }

    #[test]
    fn sublevel_logpower_ball() {
        let p = PotentialSpec::logpower(1.0);
        let m = p.sublevel_measure(2.0, 1).unwrap();
        assert!((m - 2.0 * (2f64.exp() - 1.0)).abs() < 1e-12);
        assert!(PotentialSpec::zero().sublevel_measure(1.0, 1).is_none());
    }

    #[test]
    fn ln_vstar_matches_direct() {
        for p in [PotentialSpec::power(1.5), PotentialSpec::logpower(0.5).shifted(2.0)] {
            for &r in &[0.0, 0.7, 5.0, 1e6] {
                let a = (1.0 + p.vstar(&[r])).ln();
                let b = p.ln_one_plus_vstar(f64::ln(r));
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
    }
}
