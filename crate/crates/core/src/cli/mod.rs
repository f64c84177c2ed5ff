//! Scenario files in, CSV tables and plain-text reports out.
//!
//! `run` executes one scenario, `sweep` its `[grid]` product, `validate` only the
//! assumption checks. Exit status: 0 on success, 2 when a standing assumption
//! fails, 1 for everything else.

pub mod config;
mod scenario;
mod tasks;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse, Config};
pub use scenario::{expand_grid, Params, Scenario, Task};
pub use tasks::{run_task, TaskOutput};

use crate::error::{Error, Result};
use crate::kernels::{verify_assumptions, SamplingPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Validate,
}

/// Files written and the exit status of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub files: Vec<PathBuf>,
    pub message: String,
}

pub fn exit_status(e: &Error) -> i32 {
    match e {
        Error::Assumption { .. } => EXIT_ASSUMPTION,
        _ => EXIT_INTERNAL,
    }
}

pub fn load(path: &Path) -> Result<(Config, Scenario)> {
    let text = fs::read_to_string(path)?;
    let cfg = parse(&text)?;
    let sc = Scenario::from_config(&cfg)?;
    Ok((cfg, sc))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn report(sc: &Scenario, csv_name: &str, header: &[String], summary: &[String], status: &str) -> String {
    let mut s = String::new();
    s.push_str(&sc.echo);
    let _ = writeln!(s, "# task: {}", sc.task.name());
    let _ = writeln!(s, "# table: {csv_name}");
    let _ = writeln!(s, "# columns: {}", header.join(", "));
    for line in summary {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "# status: {status}");
    s
}

fn finish(sc: &Scenario, out: &Path, header: Vec<String>, rows: Vec<Vec<String>>, summary: Vec<String>, violation: Option<String>) -> Result<Outcome> {
    let dir = out.join(&sc.id);
    let csv_name = format!("{}.csv", sc.task.name());
    let csv_path = dir.join(&csv_name);
    let report_path = dir.join("report.txt");
    let (status, message) = match &violation {
        Some(v) => (EXIT_ASSUMPTION, format!("assumption violated: {v}")),
        None => (EXIT_OK, "ok".to_string()),
    };
    write_atomic(&csv_path, &csv_bytes(&header, &rows)?)?;
    write_atomic(&report_path, report(sc, &csv_name, &header, &summary, &message).as_bytes())?;
    Ok(Outcome {
        status,
        files: vec![csv_path, report_path],
        message,
    })
}

/// Runs the scenario in `path`, writing under `out/<id>/`.
pub fn run(path: &Path, out: &Path) -> Result<Outcome> {
    let (_, sc) = load(path)?;
    run_scenario(&sc, out)
}

pub fn run_scenario(sc: &Scenario, out: &Path) -> Result<Outcome> {
    let t = run_task(sc)?;
    finish(sc, out, t.header, t.rows, t.summary, t.violation)
}

/// Runs every point of the `[grid]` product into one table.
pub fn sweep(path: &Path, out: &Path) -> Result<Outcome> {
    let (cfg, base) = load(path)?;
    let points = expand_grid(&cfg, &base)?;
    let keys: Vec<String> = base.grid.iter().map(|(k, _)| k.clone()).collect();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    let mut summary = vec![format!("grid points: {}", points.len())];
    let mut violation = None;
    for (assign, c) in points {
        let sc = Scenario::from_config(&c)?;
        let t = run_task(&sc)?;
        if header.is_empty() {
            header = keys.iter().cloned().chain(t.header.iter().cloned()).collect();
        }
        let label: Vec<String> = assign.iter().map(|(k, v)| format!("{k}={v}")).collect();
        for line in &t.summary {
            summary.push(format!("[{}] {line}", label.join(" ")));
        }
        if violation.is_none() {
            violation = t.violation.clone();
        }
        for r in t.rows {
            rows.push(assign.iter().map(|(_, v)| v.clone()).chain(r).collect());
        }
    }
    finish(&base, out, header, rows, summary, violation)
}

/// Checks the standing assumptions of the scenario without running its task.
pub fn validate(path: &Path) -> Result<Outcome> {
    let (_, sc) = load(path)?;
    let rep = verify_assumptions(&sc.kernel, &sc.pot, &SamplingPlan::default())?;
    let mut message = String::new();
    for c in &rep.checks {
        let _ = writeln!(message, "{}: {} ({})", c.condition.id(), if c.passed { "ok" } else { "VIOLATED" }, c.detail);
    }
    let status = if rep.is_ok() { EXIT_OK } else { EXIT_ASSUMPTION };
    Ok(Outcome {
        status,
        files: vec![],
        message,
    })
}

pub fn execute(cmd: Command, path: &Path, out: &Path) -> Result<Outcome> {
    match cmd {
        Command::Run => run(path, out),
        Command::Sweep => sweep(path, out),
        Command::Validate => validate(path),
    }
}

/// Applies `FKC_THREADS` to the global thread pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FKC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("FKC_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::param("FKC_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    }
    Ok(())
}
