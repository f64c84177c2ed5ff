use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fkc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fkc"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

fn col(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap()
}

const CLASSIFY: &str = "\
[scenario]
id = c
task = classify

[kernel]
family = stable
alpha = 1

[potential]
family = logpower
lambda = 2
";

#[test]
fn classify_run_writes_table_and_report() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "c.cfg", CLASSIFY);
    let out = d.path().join("out");
    let o = fkc(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out.join("c/classify.csv"));
    let r = &rows[1];
    assert_eq!((&*r[col(&rows, "iu")], &*r[col(&rows, "is")], &*r[col(&rows, "ih")]), ("yes", "yes", "yes"));
    let report = fs::read_to_string(out.join("c/report.txt")).unwrap();
    assert!(report.contains("# status: ok"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "c.cfg", CLASSIFY);
    let a = d.path().join("a");
    let b = d.path().join("b");
    assert!(fkc(&["run", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()], &[]).status.success());
    let echo = a.join("c/report.txt");
    assert!(fkc(&["run", echo.to_str().unwrap(), "--out", b.to_str().unwrap()], &[]).status.success());
    assert_eq!(fs::read(a.join("c/classify.csv")).unwrap(), fs::read(b.join("c/classify.csv")).unwrap());
}

#[test]
fn validate_reports_violated_assumption() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        d.path(),
        "t.cfg",
        "[scenario]\nid = t\ntask = validate\n[kernel]\nfamily = truncated\nalpha = 1\n[potential]\nfamily = power\nlambda = 2\n",
    );
    let o = fkc(&["validate", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("strict-positivity") && err.contains("VIOLATED"), "{err}");

    let ok = write(d.path(), "s.cfg", CLASSIFY);
    assert_eq!(fkc(&["validate", ok.to_str().unwrap()], &[]).status.code(), Some(0));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "bad.cfg", "[scenario]\nid = x\n[kernel]\nalfa = 1\n");
    let o = fkc(&["run", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("alfa"), "{err}");
}

#[test]
fn simulate_is_identical_across_thread_counts() {
    let d = TempDir::new().unwrap();
    let cfg = write(
        d.path(),
        "s.cfg",
        "[scenario]\nid = s\ntask = simulate\n[kernel]\nfamily = tempered\n[potential]\nfamily = logpower\nlambda = 1\n\
         [task]\nx = 0, 1\npaths = 2000\nseed = 3\nf = bump\n",
    );
    let run = |name: &str, threads: &str| {
        let out = d.path().join(name);
        let o = fkc(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("FKC_THREADS", threads)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("s/simulate.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("four", "4"));
}

#[test]
fn sweep_without_grid_is_one_row() {
    let d = TempDir::new().unwrap();
    let cfg = write(d.path(), "c.cfg", CLASSIFY);
    let out = d.path().join("out");
    assert!(fkc(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]).status.success());
    assert_eq!(table(&out.join("c/classify.csv")).len(), 2);
}

#[test]
fn tempered_sweep_matches_dichotomy() {
    let d = TempDir::new().unwrap();
    let text = format!(
        "{}\n[grid]\nkernel.gamma = 0.5, 1\npotential.lambda = 0.75, 1.5\n",
        CLASSIFY.replace("stable", "tempered").replace("logpower", "power")
    );
    let cfg = write(d.path(), "g.cfg", &text);
    let out = d.path().join("out");
    assert!(fkc(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]).status.success());
    let rows = table(&out.join("c/classify.csv"));
    assert_eq!(rows.len(), 5);
    let (g, l, iu) = (col(&rows, "kernel.gamma"), col(&rows, "potential.lambda"), col(&rows, "iu"));
    for r in &rows[1..] {
        let gamma: f64 = r[g].parse().unwrap();
        let lambda: f64 = r[l].parse().unwrap();
        assert_eq!(r[iu] == "yes", lambda > gamma, "gamma {gamma} lambda {lambda}");
    }
}

#[test]
fn oversized_grid_is_refused() {
    let d = TempDir::new().unwrap();
    let text = CLASSIFY.replace("task = classify", "task = classify\ngrid_cap = 2") + "\n[grid]\npotential.lambda = 0.5, 1, 2\n";
    let cfg = write(d.path(), "g.cfg", &text);
    let o = fkc(&["sweep", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.path().join("c").exists());
}
