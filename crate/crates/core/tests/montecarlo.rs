use std::f64::consts::PI;

use fkc::kernels::{JumpKernelSpec, PotentialSpec};
use fkc::montecarlo::*;
use fkc::spectral::{bump, trial_rng};
use fkc::Error;

fn quantile(v: &mut [f64], p: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * p).round() as usize]
}

#[test]
fn cauchy_quartiles() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let s = IncrementSampler::new(&k, DEFAULT_EPS).unwrap();
    let n = 100_000;
    let mut rng = trial_rng(11, 0);
    let mut v: Vec<f64> = (0..n).map(|_| s.sample(1.0, &mut rng)).collect();
    // quantile stderr sqrt(p(1-p)/n) / density at the quantile
    let se = |p: f64, q: f64| (p * (1.0 - p) / n as f64).sqrt() * PI * (1.0 + q * q);
    let med = quantile(&mut v, 0.5);
    assert!(med.abs() < 3.0 * se(0.5, 0.0), "median {med}");
    let q1 = quantile(&mut v, 0.25);
    let q3 = quantile(&mut v, 0.75);
    assert!((q1 + 1.0).abs() < 3.0 * se(0.25, 1.0), "q1 {q1}");
    assert!((q3 - 1.0).abs() < 3.0 * se(0.75, 1.0), "q3 {q3}");
}

#[test]
fn sample_increment_uses_unit_scale() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let mut rng = trial_rng(5, 0);
    let mut v: Vec<f64> = (0..20_000).map(|_| sample_increment(&k, 1.0, &mut rng).unwrap()).collect();
    assert!((quantile(&mut v, 0.75) - 1.0).abs() < 0.06);
    assert!(matches!(sample_increment(&k, 0.0, &mut rng), Err(Error::Parameter(_))));
}

#[test]
fn stable_scaling_in_distribution() {
    for alpha in [0.5, 1.0, 1.5] {
        let k = JumpKernelSpec::stable(1, alpha);
        let s = IncrementSampler::new(&k, DEFAULT_EPS).unwrap();
        let n = 100_000;
        let draw = |dt: f64, seed: u64| -> Vec<f64> {
            let mut rng = trial_rng(seed, 0);
            (0..n).map(|_| s.sample(dt, &mut rng) / dt.powf(1.0 / alpha)).collect()
        };
        let base = draw(1.0, 1);
        for (dt, seed) in [(0.1, 2), (10.0, 3)] {
            let (d, p) = ks_two_sample(&base, &draw(dt, seed)).unwrap();
            assert!(p > 0.01, "alpha {alpha} dt {dt}: D = {d}, p = {p}");
        }
    }
}

#[test]
fn tempered_big_jump_count_is_poisson() {
    let k = JumpKernelSpec::tempered(1, 1.0, 1.0);
    let s = IncrementSampler::new(&k, DEFAULT_EPS).unwrap();
    let mean = 2.0 * (-1.0f64).exp();
    assert!((s.big_jump_rate() - mean).abs() < 1e-12);
    let n = 100_000;
    let mut rng = trial_rng(3, 0);
    let counts: Vec<f64> = (0..n).map(|_| s.big_jump_count(1.0, &mut rng) as f64).collect();
    let m = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((m - mean).abs() < 3.0 * (mean / n as f64).sqrt(), "mean {m}");
    assert!((var / mean - 1.0).abs() < 0.03, "dispersion {}", var / mean);
}

#[test]
fn tempered_increment_variance() {
    // 2 ∫ u² ρ = 2 (c ∫_0^1 u^{1-α} du + ∫_1^∞ u² e^{-u} du) = 2 (c + 5/e) for α = γ = 1
    let k = JumpKernelSpec::tempered(1, 1.0, 1.0);
    let s = IncrementSampler::new(&k, 1e-2).unwrap();
    let c = k.normalization();
    let exact = 2.0 * (c + 5.0 * (-1.0f64).exp()) * 0.5;
    let n = 200_000;
    let mut rng = trial_rng(9, 0);
    let v: Vec<f64> = (0..n).map(|_| s.sample(0.5, &mut rng)).collect();
    let m2 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let m4 = v.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
    let se = ((m4 - m2 * m2) / n as f64).sqrt();
    assert!((m2 - exact).abs() < 4.0 * se, "second moment {m2} vs {exact} (se {se})");
}

#[test]
fn tempered_gamma_half_big_jumps_follow_the_tail() {
    // P(U > u | U > 1) = Γ(2, √u) / Γ(2, 1) = (1 + √u) e^{-√u} / (2/e) for γ = 1/2
    let k = JumpKernelSpec::tempered(1, 1.0, 0.5);
    let s = IncrementSampler::with_small_jumps(&k, 1.0, SmallJumps::Drop).unwrap();
    let mut rng = trial_rng(4, 0);
    let mut sizes = Vec::new();
    // over a short step almost every non-zero outcome is a single jump
    while sizes.len() < 20_000 {
        let x = s.sample(0.002, &mut rng);
        if x != 0.0 {
            sizes.push(x.abs());
        }
    }
    let tail = |u: f64| (1.0 + u.sqrt()) * (-u.sqrt()).exp() / (2.0 * (-1.0f64).exp());
    let n = sizes.len() as f64;
    for u in [2.0, 5.0, 20.0] {
        let emp = sizes.iter().filter(|&&v| v > u).count() as f64 / n;
        assert!((emp - tail(u)).abs() < 4.0 * (tail(u) / n).sqrt() + 0.01 * tail(u), "u {u}: {emp} vs {}", tail(u));
    }
}

#[test]
fn feynman_kac_exact_cases() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let cfg = PathConfig::new(1.0, 2_000, 1);
    let e = feynman_kac(&k, &PotentialSpec::zero(), 0.3, |_| 1.0, &cfg).unwrap();
    assert_eq!((e.value, e.stderr), (1.0, 0.0));
    let c = 0.7;
    let e = feynman_kac(&k, &PotentialSpec::constant(c), 0.3, |_| 1.0, &cfg).unwrap();
    assert!((e.value - (-c).exp()).abs() < 1e-12);
    assert!(e.stderr < 1e-12);
    assert!(e.bias_notes.iter().any(|n| n.contains("trapezoid")));
}

#[test]
fn probabilities_and_weights_stay_in_range() {
    let k = JumpKernelSpec::tempered(1, 1.5, 0.5);
    let cfg = PathConfig::new(0.5, 2_000, 2);
    let pot = PotentialSpec::power(1.0);
    let e = feynman_kac(&k, &pot, 1.0, |y| if y.abs() < 1.0 { 1.0 } else { 0.0 }, &cfg).unwrap();
    assert!((0.0..=1.0).contains(&e.value));
    let p = exit_time_prob(&k, 0.0, 0.5, &cfg).unwrap();
    assert!((0.0..=1.0).contains(&p.value));
    assert!(p.bias_notes.iter().any(|n| n.contains("step resolution")));
}

#[test]
fn time_step_richardson_check() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let pot = PotentialSpec::logpower(2.0);
    let f = |y: f64| bump(y / 2.0);
    let a = feynman_kac(&k, &pot, 0.5, f, &PathConfig::new(1.0, 40_000, 21).with_dt(0.02)).unwrap();
    let b = feynman_kac(&k, &pot, 0.5, f, &PathConfig::new(1.0, 40_000, 22).with_dt(0.01)).unwrap();
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.value - b.value).abs() < 3.0 * se, "{} vs {} (se {se})", a.value, b.value);
}

#[test]
fn bit_identical_across_thread_counts() {
    let k = JumpKernelSpec::tempered(1, 1.0, 1.0);
    let pot = PotentialSpec::logpower(1.0);
    let cfg = PathConfig::new(1.0, 3_000, 77);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| feynman_kac(&k, &pot, 0.0, |y| bump(y), &cfg).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn config_invariants() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let pot = PotentialSpec::zero();
    let bad_dt = PathConfig::new(1.0, 10, 1).with_dt(0.3);
    assert!(matches!(feynman_kac(&k, &pot, 0.0, |_| 1.0, &bad_dt), Err(Error::Parameter(_))));
    assert!(PathConfig::new(1.0, 0, 1).validate().is_err());
    let mut c = PathConfig::new(1.0, 10, 1);
    c.eps = 2.0;
    assert!(c.validate().is_err());
    assert!(exit_time_prob(&k, 0.0, 0.0, &PathConfig::new(1.0, 10, 1)).is_err());
}

#[test]
fn exit_survival_at_time_zero_is_one() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let e = exit_time_prob(&k, 0.0, 1.0, &PathConfig::new(0.0, 100, 1)).unwrap();
    assert_eq!((e.value, e.stderr), (1.0, 0.0));
}

#[test]
fn exit_time_scaling_across_radii() {
    // τ_{B(0,r)} ~ r^α τ_{B(0,1)} for α = 1; the step scales with r so the discretizations match
    let k = JumpKernelSpec::stable(1, 1.0);
    let sample = |r: f64, seed: u64| {
        let cfg = PathConfig::new(2.0 * r, 50_000, seed).with_dt(0.01 * r);
        exit_times(&k, 0.0, r, &cfg).unwrap().scaled(r)
    };
    let base = sample(1.0, 1);
    for (r, seed) in [(0.5, 2), (2.0, 3)] {
        let (d, p) = ks_two_sample(&base, &sample(r, seed)).unwrap();
        assert!(p > 0.01, "r {r}: D = {d}, p = {p}");
    }
}

#[test]
fn median_exit_time_calibrates_the_survival_bound() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let et = exit_times(&k, 0.0, 1.0, &PathConfig::new(5.0, 40_000, 8).with_dt(0.005)).unwrap();
    let c0 = et.median().unwrap();
    assert!(c0 > 0.1 && c0 < 1.0, "t* = {c0}");
    assert!((et.survival(c0) - 0.5).abs() < 0.01);
    // P^x(τ_{B(x, r)} ≥ c0 r^α) ≥ 1/2 at other radii and centres
    for (x, r) in [(3.0, 0.5), (-2.0, 2.0)] {
        let t = c0 * r;
        let cfg = PathConfig::new(t, 40_000, 9).with_dt(t / (c0 / 0.005).round());
        let p = exit_time_prob(&k, x, r, &cfg).unwrap();
        assert!(p.value + 3.0 * p.stderr >= 0.5, "r {r}: {}", p.value);
    }
}

#[test]
fn exit_event_windows() {
    let k = JumpKernelSpec::tempered(1, 1.0, 1.0);
    let et = exit_times(&k, 10.0, 1.0, &PathConfig::new(10.0, 20_000, 3).with_dt(0.005)).unwrap();
    let t0 = et.median().unwrap();
    let cfg = PathConfig::new(t0, 20_000, 5).with_dt(t0 / 40.0);
    let empty = exit_event_prob(&k, 10.0, 1.0, 0.5 * t0, 0.5 * t0, &cfg).unwrap();
    assert_eq!(empty.estimate.value, 0.0);
    let a = exit_event_prob(&k, 10.0, 1.0, 0.0, 0.5 * t0, &cfg).unwrap();
    let b = exit_event_prob(&k, 10.0, 1.0, 0.5 * t0, t0, &cfg).unwrap();
    assert!(a.estimate.value > 0.0 && b.estimate.value > 0.0);
    let q = a.quotient / b.quotient;
    assert!((0.5..=2.0).contains(&q), "window quotients {} and {}", a.quotient, b.quotient);
    assert!(matches!(exit_event_prob(&k, 2.0, 1.0, 0.0, t0, &cfg), Err(Error::Geometry(_))));
}

#[test]
fn exit_event_levy_system_matches_direct_counting() {
    let k = JumpKernelSpec::stable(1, 1.0);
    let cfg = PathConfig::new(0.4, 200_000, 13).with_dt(0.002);
    let e = exit_event_prob(&k, 4.0, 1.0, 0.0, 0.4, &cfg).unwrap();
    let se = (e.estimate.stderr.powi(2) + e.direct.stderr.powi(2)).sqrt();
    // the direct count misses exits between steps, so allow a small relative bias on top
    assert!(
        (e.estimate.value - e.direct.value).abs() < 4.0 * se + 0.1 * e.estimate.value,
        "{} vs {}",
        e.estimate.value,
        e.direct.value
    );
}

#[test]
fn ratio_test_marks_weak_denominators_inconclusive() {
    let k = JumpKernelSpec::tempered(1, 1.0, 1.0);
    let cfg = PathConfig::new(1.0, 2_000, 4).with_dt(0.05);
    let mut cfg = cfg;
    cfg.eps = 0.05;
    let rep = iu_ratio_test(&k, &PotentialSpec::logpower(0.5), &[8.0, 40.0], &cfg).unwrap();
    assert_eq!(rep.rows[0].method, Denominator::ImportanceSampled);
    let far = &rep.rows[1];
    if far.denominator_stderr > INCONCLUSIVE_REL_STDERR * far.denominator || far.denominator == 0.0 {
        assert!(far.ratio.is_none());
    }
    assert!(iu_ratio_test(&k, &PotentialSpec::zero(), &[10.0], &cfg.with_t(2.5).with_dt(0.05)).is_err());
}
