use proptest::prelude::*;

use fkc::criteria::{alpha_rs, beta_rate, big_phi, classify, gen_inverse, Deltas, Monotonicity, PhiWeight, RateFunction};
use fkc::kernels::{phi_lower, JumpKernelSpec, PotentialSpec};
use fkc::special::ln_unit_ball_volume;
use fkc::Error;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn stable_logpower() -> impl Strategy<Value = (JumpKernelSpec, PotentialSpec)> {
    (prop::sample::select(vec![0.5, 1.0, 1.5]), 0.3f64..3.0)
        .prop_map(|(a, l)| (JumpKernelSpec::stable(1, a), PotentialSpec::logpower(l)))
}

fn tempered_power() -> impl Strategy<Value = (JumpKernelSpec, PotentialSpec)> {
    (0.3f64..=1.0, 0.3f64..3.0).prop_map(|(g, l)| (JumpKernelSpec::tempered(1, 1.0, g), PotentialSpec::power(l)))
}

fn scenario() -> impl Strategy<Value = (JumpKernelSpec, PotentialSpec)> {
    prop_oneof![stable_logpower(), tempered_power()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rates_are_monotone((k, p) in scenario()) {
        let beta = beta_rate(&k, &p, Deltas::default()).unwrap();
        let vals: Vec<f64> = log_grid(1e-6, 1e2, 40).iter().map(|&s| beta.ln_eval(s).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "beta rises: {} -> {}", w[0], w[1]);
        }
        let phi = big_phi(&p).unwrap();
        let vals: Vec<f64> = log_grid(1e-3, 1e6, 40).iter().map(|&s| phi.eval(s).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "Phi falls: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn flag_chain((k, p) in scenario()) {
        let v = classify(&k, &p).unwrap();
        if v.flags.iu.is_yes() {
            prop_assert!(v.flags.is.is_yes());
        }
        if v.flags.is.is_yes() {
            prop_assert!(v.flags.ih.is_yes());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generalized_inverse_of_increasing(a in 0.01f64..100.0, p in 0.1f64..4.0, b in 0.0f64..10.0, s in 1e-4f64..1e4) {
        let f = move |s: f64| a * s.powf(p) + b * s.ln_1p();
        let rate = RateFunction::from_fn("f", Monotonicity::NonDecreasing, f);
        let inv = gen_inverse(&rate, f(s)).unwrap();
        prop_assert!(inv <= s * (1.0 + 1e-9), "inverse {inv} beyond {s}");
        prop_assert!(f(inv) >= f(s) * (1.0 - 1e-8), "f(inverse) {} below {}", f(inv), f(s));
    }

    #[test]
    fn generalized_inverse_of_decreasing(a in 0.01f64..100.0, p in 0.1f64..4.0, s in 1e-4f64..1e4) {
        let f = move |s: f64| a * s.powf(-p);
        let rate = RateFunction::from_fn("f", Monotonicity::NonIncreasing, f);
        let inv = gen_inverse(&rate, f(s)).unwrap();
        prop_assert!((inv / s - 1.0).abs() < 1e-8, "inverse {inv} vs {s}");
    }

    #[test]
    fn tabulated_inverse_matches_scan(
        steps in prop::collection::vec((0.01f64..2.0, 0.0f64..3.0), 2..8),
        frac in 0.0f64..1.0,
    ) {
        let mut rows = vec![(0.5, 1.0)];
        for (ds, df) in steps {
            let (s, f) = *rows.last().unwrap();
            rows.push((s + ds, f + df));
        }
        let (s0, f0) = rows[0];
        let (s1, f1) = *rows.last().unwrap();
        prop_assume!(f1 > f0);
        let rate = RateFunction::tabulated("table", Monotonicity::NonDecreasing, rows.clone()).unwrap();
        let r = f0 + frac * (f1 - f0);
        let n = 1_000_000;
        let step = (s1 - s0) / n as f64;
        let scan = (0..=n)
            .map(|i| s0 + step * i as f64)
            .find(|&s| rate.eval(s).unwrap() >= r * (1.0 - 1e-12))
            .unwrap();
        let inv = gen_inverse(&rate, r).unwrap();
        prop_assert!((inv - scan).abs() <= 2.0 * step + 1e-9 * s1, "inverse {inv} vs scan {scan}");
        let beyond = matches!(gen_inverse(&rate, 2.0 * f1), Err(Error::UnboundedInverse { .. }));
        prop_assert!(beyond, "no error past the last row");
    }
}

// Brute-force minimiser over a dense log grid of t; stable profiles are
// decreasing, so the running sup of 1/ρ and the infimum of φ over a centred
// ball are attained at the outer radius.
fn alpha_brute(k: &JumpKernelSpec, p: &PotentialSpec, r: f64, s: f64) -> f64 {
    let top = r.min(1e8).ln();
    let n = 100_000;
    let ln_ball = ln_unit_ball_volume(k.dim);
    let mut sup_inv_rho: f64 = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let ln_t = top - 60.0 + 60.0 * i as f64 / (n - 1) as f64;
        let t = ln_t.exp();
        sup_inv_rho = sup_inv_rho.max(1.0 / k.profile(t));
        let vol = (ln_ball + ln_t).exp();
        if 2.0 * sup_inv_rho / vol > s {
            continue;
        }
        let w = phi_lower(k, p, &[r + t]).unwrap().value;
        best = best.min(2.0 / (vol * w * w));
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn alpha_matches_brute_force(
        a in prop::sample::select(vec![0.5, 1.0, 1.5]),
        l in 0.5f64..3.0,
        r in 0.5f64..50.0,
        s in 1e-3f64..10.0,
    ) {
        let k = JumpKernelSpec::stable(1, a);
        let p = PotentialSpec::logpower(l);
        let got = alpha_rs(&k, &PhiWeight::new(&k, &p), r, s).unwrap();
        let brute = alpha_brute(&k, &p, r, s);
        prop_assert!(got <= brute * (1.0 + 1e-9), "alpha {got} above brute force {brute}");
        prop_assert!(brute <= got * (1.0 + 1e-3), "brute force {brute} well below alpha {got}");
    }
}
