use super::scenario::{Params, Scenario, Task};
use crate::criteria::{alpha_rs, classify_with, ClassifyOptions, Deltas, PhiWeight};
use crate::error::{Error, Result};
use crate::kernels::{phi_lower, verify_assumptions, SamplingPlan};
use crate::montecarlo::{feynman_kac, iu_ratio_test, PathConfig};
use crate::spectral::{
    assemble, bump, dense_spectrum, ground_state_envelope, ground_state_with, groundstate_bounds_check, gn_probe, heat_kernel, iu_ratio,
    lyapunov_check, super_poincare_check, EigenOptions, Grid1D,
};

/// CSV table plus free-text summary lines for the report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    /// Violated standing assumption reported by the validate task.
    pub violation: Option<String>,
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn grid(p: &Params) -> Result<Grid1D> {
    Grid1D::new(p.f64("L")?, p.usize("n")?)
}

fn path_config(p: &Params) -> Result<PathConfig> {
    let mut cfg = PathConfig::new(p.f64("t")?, p.usize("paths")?, p.u64("seed")?).with_dt(p.f64("dt")?);
    cfg.eps = p.f64("eps")?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run_task(sc: &Scenario) -> Result<TaskOutput> {
    let (k, v, p) = (&sc.kernel, &sc.pot, &sc.params);
    let mut out = TaskOutput::default();
    match sc.task {
        Task::Classify => {
            let opts = ClassifyOptions {
                deltas: Deltas {
                    d1: p.f64("d1")?,
                    d2: p.f64("d2")?,
                    d3: p.f64("d3")?,
                    d4: p.f64("d4")?,
                },
                scan: p.bool("scan")?,
                plan: SamplingPlan::default(),
            };
            let vd = classify_with(k, v, &opts)?;
            out.header = cols(&["id", "route", "p", "r_squared", "iu", "is", "ih", "scan_stable", "test_path", "curvature"]);
            out.rows.push(vec![
                sc.id.clone(),
                vd.route.name().into(),
                num(vd.exponent.p),
                num(vd.exponent.r_squared),
                vd.flags.iu.to_string(),
                vd.flags.is.to_string(),
                vd.flags.ih.to_string(),
                vd.scan_stable.map(|b| b.to_string()).unwrap_or_else(|| "n/a".into()),
                format!("{:?}", vd.diagnostics.path).to_lowercase(),
                vd.exponent.curvature.to_string(),
            ]);
            out.summary.push(format!("route {} exponent p = {} (R^2 = {})", vd.route.name(), vd.exponent.p, vd.exponent.r_squared));
            out.summary.push(format!("IU {} IS {} IH {}", vd.flags.iu, vd.flags.is, vd.flags.ih));
            for n in &vd.diagnostics.notes {
                out.summary.push(format!("note: {n}"));
            }
            for e in &vd.scan {
                out.summary.push(format!(
                    "scan d1={} d2={} d3={} d4={}: p = {} flags {}/{}/{}",
                    e.deltas.d1, e.deltas.d2, e.deltas.d3, e.deltas.d4, e.p, e.flags.iu, e.flags.is, e.flags.ih
                ));
            }
        }
        Task::GroundState => {
            let op = assemble(k, v, grid(p)?)?;
            let sol = ground_state_with(
                &op,
                &EigenOptions {
                    modes: p.usize("modes")?.max(1),
                    ..Default::default()
                },
            )?;
            let env = ground_state_envelope(k, v).ok();
            out.header = cols(&["x", "phi1", "envelope_ratio"]);
            let g = sol.grid;
            for (i, &phi) in sol.phi1().iter().enumerate() {
                let x = g.x(i);
                out.rows.push(vec![num(x), num(phi), opt(env.as_ref().map(|e| phi / e(x)))]);
            }
            out.summary.push(format!("lambda1 = {}", sol.lambda1()));
            for m in 1..sol.modes() {
                out.summary.push(format!("lambda{} = {}", m + 1, sol.eigenvalues[m]));
            }
            out.summary.push(format!("residual = {:e}, iterations = {}", sol.residual, sol.iterations));
            out.summary.push(format!("phi1 positive at every node: {}", sol.positive()));
            let b = groundstate_bounds_check(&sol, k, v)?;
            out.summary.push(format!("C0 = {} at x = {} (|x| <= {})", b.c0, b.c0_at, b.window));
            if let Some(e) = b.envelope {
                out.summary.push(format!(
                    "envelope ratio in [{}, {}] over {} <= |x| <= {}, spread {}",
                    e.min,
                    e.max,
                    e.from,
                    e.to,
                    e.spread()
                ));
            }
        }
        Task::HeatKernel => {
            let t = p.f64("t")?;
            let kmax = p.usize("kmax")?;
            out.header = cols(&[
                "L",
                "n",
                "t",
                "lambda1",
                "modes_used",
                "truncation_error",
                "trace",
                "spectral_trace",
                "iu_sup",
                "iu_coverage",
            ]);
            for l in p.list("L")? {
                let g = Grid1D::with_spacing(l, p.f64("spacing")?)?;
                let op = assemble(k, v, g)?;
                let sol = dense_spectrum(&op)?;
                let hk = heat_kernel(&sol, t, (kmax > 0).then_some(kmax))?;
                let r = iu_ratio(&hk, &sol);
                out.rows.push(vec![
                    num(l),
                    g.n.to_string(),
                    num(t),
                    num(sol.lambda1()),
                    hk.modes_used.to_string(),
                    num(hk.truncation_error),
                    num(hk.trace()),
                    num(hk.spectral_trace),
                    num(r.sup),
                    num(r.coverage()),
                ]);
            }
            if out.rows.len() > 1 {
                let first: f64 = out.rows[0][8].parse().unwrap_or(f64::NAN);
                let last: f64 = out.rows.last().unwrap()[8].parse().unwrap_or(f64::NAN);
                out.summary.push(format!("IU ratio growth from first to last L: {}", last / first));
            }
        }
        Task::SuperPoincare => {
            let g = grid(p)?;
            let op = assemble(k, v, g)?;
            let weight: Vec<f64> = g
                .nodes()
                .iter()
                .map(|&x| phi_lower(k, v, &[x]).map(|b| b.value))
                .collect::<Result<_>>()?;
            let wt = PhiWeight::new(k, v);
            let (trials, seed) = (p.usize("trials")?, p.u64("seed")?);
            out.header = cols(&["r", "s", "alpha", "trials", "violations", "worst_ratio"]);
            let mut total = 0;
            for r in p.list("r")? {
                for s in p.list("s")? {
                    let a = alpha_rs(k, &wt, r, s)?;
                    let rep = super_poincare_check(&op, &weight, r, s, a, trials, seed)?;
                    total += rep.violations;
                    out.rows.push(vec![
                        num(r),
                        num(s),
                        num(a),
                        trials.to_string(),
                        rep.violations.to_string(),
                        num(rep.worst_ratio),
                    ]);
                }
            }
            out.summary.push(format!("violations: {total}"));
        }
        Task::GnProbe => {
            let op = assemble(k, v, grid(p)?)?;
            let sol = ground_state_with(&op, &EigenOptions::default())?;
            let probe = gn_probe(&op, &sol, &p.list("nvalues")?)?;
            out.header = cols(&["n", "mu_g2", "mu_abs_sq", "form", "r_n", "bound"]);
            for r in &probe.rows {
                out.rows.push(vec![num(r.n), num(r.mu_g2), num(r.mu_abs_sq), num(r.form), num(r.r_n), num(r.bound)]);
            }
            out.summary.push(format!("slope = {}, target d + 2 alpha = {}", probe.slope, 1.0 + 2.0 * k.alpha));
            out.summary.push(format!("mu slope = {}", probe.mu_slope));
            if !probe.excluded.is_empty() {
                out.summary.push(format!("excluded n: {:?}", probe.excluded));
            }
        }
        Task::Lyapunov => {
            let op = assemble(k, v, grid(p)?)?;
            let rep = lyapunov_check(&op, p.f64("c0")?)?;
            out.header = cols(&["c0", "max_ratio", "max_at", "negative_beyond", "range"]);
            out.rows.push(vec![
                num(rep.c0),
                num(rep.max_ratio),
                num(rep.max_at),
                opt(rep.negative_beyond),
                num(rep.range),
            ]);
        }
        Task::Simulate => {
            let cfg = path_config(p)?;
            let width = p.f64("width")?;
            if !(width > 0.0) {
                return Err(Error::param("width must be positive"));
            }
            let f: Box<dyn Fn(f64) -> f64 + Sync> = match p.str("f") {
                "one" => Box::new(|_| 1.0),
                "bump" => Box::new(move |y| bump(y / width)),
                "ball" => Box::new(move |y| if y.abs() < width { 1.0 } else { 0.0 }),
                other => return Err(Error::param(format!("unknown test function `{other}` (one, bump, ball)"))),
            };
            out.header = cols(&["id", "op", "x", "t", "n", "dt", "estimate", "stderr", "bias"]);
            for x in p.list("x")? {
                let e = feynman_kac(k, v, x, &f, &cfg)?;
                out.rows.push(vec![
                    sc.id.clone(),
                    "feynman_kac".into(),
                    num(x),
                    num(cfg.t),
                    e.n.to_string(),
                    num(cfg.dt),
                    num(e.value),
                    num(e.stderr),
                    e.bias_notes.join("; "),
                ]);
            }
        }
        Task::RatioTest => {
            let cfg = path_config(p)?;
            let rep = iu_ratio_test(k, v, &p.list("x")?, &cfg)?;
            out.header = cols(&[
                "x",
                "numerator",
                "numerator_stderr",
                "numerator_lcb",
                "denominator",
                "denominator_stderr",
                "method",
                "ratio",
            ]);
            for r in &rep.rows {
                out.rows.push(vec![
                    num(r.x),
                    num(r.numerator.value),
                    num(r.numerator.stderr),
                    num(r.numerator_lcb),
                    num(r.denominator),
                    num(r.denominator_stderr),
                    format!("{:?}", r.method).to_lowercase(),
                    r.ratio.map(num).unwrap_or_else(|| "inconclusive".into()),
                ]);
            }
            out.summary.push(format!("growth (last/first) = {}", opt(rep.growth())));
            out.summary.push(format!("monotone increasing: {}", rep.monotone_increasing()));
        }
        Task::Validate => {
            let rep = verify_assumptions(k, v, &SamplingPlan::default())?;
            out.header = cols(&["condition", "passed", "detail"]);
            for c in &rep.checks {
                out.rows.push(vec![c.condition.id().into(), c.passed.to_string(), c.detail.clone()]);
            }
            out.summary.push(format!("fitted small-jump order = {}", rep.fitted_small_jump_order));
            if let Some(c) = rep.checks.iter().find(|c| !c.passed) {
                out.violation = Some(format!("{}: {}", c.condition, c.detail));
            }
        }
    }
    Ok(out)
}
