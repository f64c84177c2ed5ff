use std::collections::BTreeMap;
use std::fmt::Write;

use super::config::{parse_error, parse_f64, parse_list, parse_pairs, Config, Entry};
use crate::error::{Error, Result};
use crate::kernels::{ExceptionalSet, JumpKernelSpec, Monotone, MonotoneSegment, PotentialFamily, PotentialSpec, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classify,
    GroundState,
    HeatKernel,
    SuperPoincare,
    GnProbe,
    Lyapunov,
    Simulate,
    RatioTest,
    Validate,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Classify,
        Task::GroundState,
        Task::HeatKernel,
        Task::SuperPoincare,
        Task::GnProbe,
        Task::Lyapunov,
        Task::Simulate,
        Task::RatioTest,
        Task::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::GroundState => "groundstate",
            Task::HeatKernel => "heatkernel",
            Task::SuperPoincare => "superpoincare",
            Task::GnProbe => "gnprobe",
            Task::Lyapunov => "lyapunov",
            Task::Simulate => "simulate",
            Task::RatioTest => "ratiotest",
            Task::Validate => "validate",
        }
    }

    pub fn from_name(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Task keys with their defaults.
    pub fn schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Task::Classify => &[("d1", "1"), ("d2", "1"), ("d3", "1"), ("d4", "1"), ("scan", "true")],
            Task::GroundState => &[("L", "200"), ("n", "4001"), ("modes", "1")],
            Task::HeatKernel => &[("L", "100"), ("spacing", "0.2"), ("t", "1"), ("kmax", "0")],
            Task::SuperPoincare => &[
                ("L", "40"),
                ("n", "801"),
                ("r", "1, 5, 10"),
                ("s", "0.01, 0.1, 1"),
                ("trials", "100"),
                ("seed", "1"),
            ],
            Task::GnProbe => &[("L", "128"), ("n", "2561"), ("nvalues", "4, 8, 16, 32")],
            Task::Lyapunov => &[("L", "40"), ("n", "801"), ("c0", "1")],
            Task::Simulate => &[
                ("x", "0"),
                ("t", "1"),
                ("dt", "0.01"),
                ("paths", "10000"),
                ("seed", "1"),
                ("eps", "0.001"),
                ("f", "one"),
                ("width", "1"),
            ],
            Task::RatioTest => &[
                ("x", "10, 30, 100"),
                ("t", "1"),
                ("dt", "0.01"),
                ("paths", "10000"),
                ("seed", "1"),
                ("eps", "0.001"),
            ],
            Task::Validate => &[],
        }
    }
}

const SCENARIO_KEYS: &[(&str, Option<&str>)] = &[("id", None), ("task", None), ("grid_cap", Some("1024"))];

const KERNEL_KEYS: &[(&str, Option<&str>)] = &[
    ("family", Some("stable")),
    ("dim", Some("1")),
    ("alpha", Some("1")),
    ("gamma", Some("1")),
    ("kappa", Some("1")),
    ("cnorm", None),
    ("alpha1", None),
    ("alpha2", None),
    ("c1", None),
    ("c2", None),
    ("profile", None),
    ("monotone", None),
];

const POTENTIAL_KEYS: &[(&str, Option<&str>)] = &[
    ("family", Some("zero")),
    ("lambda", None),
    ("offset", Some("0")),
    ("set", None),
    ("k0", None),
    ("set_alpha", None),
    ("c", None),
    ("theta", None),
    ("level", None),
    ("threshold", None),
    ("table", None),
];

/// Resolved task parameters, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Entry>,
}

impl Params {
    fn entry(&self, key: &str) -> &Entry {
        self.values.get(key).unwrap_or_else(|| panic!("task key `{key}` is not in the schema"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.entry(key))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let e = self.entry(key);
        e.value
            .parse()
            .map_err(|_| parse_error(e.line, &e.content, format!("`{key}` expects a non-negative integer")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let e = self.entry(key);
        e.value
            .parse()
            .map_err(|_| parse_error(e.line, &e.content, format!("`{key}` expects a non-negative integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        let e = self.entry(key);
        match e.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(parse_error(e.line, &e.content, format!("`{key}` expects true or false"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(self.entry(key))
    }

    pub fn str(&self, key: &str) -> &str {
        &self.entry(key).value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub task: Task,
    pub kernel: JumpKernelSpec,
    pub pot: PotentialSpec,
    pub params: Params,
    pub grid: Vec<(String, Vec<String>)>,
    pub grid_cap: usize,
    /// Resolved config, defaults included, in config syntax.
    pub echo: String,
}

fn check_keys(cfg: &Config, section: &str, allowed: &[&str]) -> Result<()> {
    if let Some(s) = cfg.section(section) {
        for e in &s.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(parse_error(e.line, &e.content, format!("unknown key `{}` in [{section}]", e.key)));
            }
        }
    }
    Ok(())
}

fn missing(section: &str, key: &str) -> Error {
    parse_error(0, &format!("[{section}]"), format!("missing key `{key}`"))
}

fn resolve(cfg: &Config, section: &str, schema: &[(&str, Option<&str>)]) -> Vec<(String, Entry)> {
    schema
        .iter()
        .filter_map(|&(k, d)| match cfg.get(section, k) {
            Some(e) => Some((k.to_string(), e.clone())),
            None => d.map(|d| {
                (
                    k.to_string(),
                    Entry {
                        key: k.to_string(),
                        value: d.to_string(),
                        line: 0,
                        content: format!("{k} = {d} (default)"),
                    },
                )
            }),
        })
        .collect()
}

fn lookup<'a>(resolved: &'a [(String, Entry)], key: &str) -> Option<&'a Entry> {
    resolved.iter().find(|(k, _)| k == key).map(|(_, e)| e)
}

fn num(resolved: &[(String, Entry)], section: &str, key: &str) -> Result<f64> {
    lookup(resolved, key).ok_or_else(|| missing(section, key)).and_then(parse_f64)
}

fn opt_num(resolved: &[(String, Entry)], key: &str) -> Result<Option<f64>> {
    lookup(resolved, key).map(parse_f64).transpose()
}

fn kernel_from(r: &[(String, Entry)]) -> Result<JumpKernelSpec> {
    let fam = lookup(r, "family").unwrap();
    let dim_e = lookup(r, "dim").unwrap();
    let dim: usize = dim_e
        .value
        .parse()
        .map_err(|_| parse_error(dim_e.line, &dim_e.content, "`dim` expects a positive integer"))?;
    let alpha = num(r, "kernel", "alpha")?;
    let gamma = num(r, "kernel", "gamma")?;
    let mut k = match fam.value.as_str() {
        "stable" => JumpKernelSpec::stable(dim, alpha),
        "tempered" => JumpKernelSpec::tempered(dim, alpha, gamma),
        "truncated" => JumpKernelSpec::truncated(dim, alpha),
        "custom" => {
            let e = lookup(r, "profile").ok_or_else(|| missing("kernel", "profile"))?;
            let knots = parse_pairs(e)?;
            let segments = match lookup(r, "monotone").map(|e| e.value.as_str()) {
                None | Some("none") => vec![],
                Some("nonincreasing") => vec![MonotoneSegment {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    direction: Monotone::NonIncreasing,
                }],
                Some(_) => {
                    let e = lookup(r, "monotone").unwrap();
                    return Err(parse_error(e.line, &e.content, "`monotone` is none or nonincreasing"));
                }
            };
            JumpKernelSpec::custom(dim, RadialProfile::new(knots, segments)?)
        }
        other => return Err(parse_error(fam.line, &fam.content, format!("unknown kernel family `{other}`"))),
    };
    k = k.with_kappa(num(r, "kernel", "kappa")?);
    k.cnorm = opt_num(r, "cnorm")?;
    k.alpha1 = opt_num(r, "alpha1")?;
    k.alpha2 = opt_num(r, "alpha2")?;
    k.c1 = opt_num(r, "c1")?;
    k.c2 = opt_num(r, "c2")?;
    k.validate()?;
    Ok(k)
}

fn potential_from(r: &[(String, Entry)]) -> Result<PotentialSpec> {
    let fam = lookup(r, "family").unwrap();
    let lambda = || num(r, "potential", "lambda");
    let p = match fam.value.as_str() {
        "zero" | "constant" => PotentialSpec::zero(),
        "power" => PotentialSpec::power(lambda()?),
        "logpower" => PotentialSpec::logpower(lambda()?),
        "irregular" => {
            let set_e = lookup(r, "set").ok_or_else(|| missing("potential", "set"))?;
            let set = match set_e.value.as_str() {
                "balls" => ExceptionalSet::BallUnion {
                    k0: num(r, "potential", "k0")?,
                    alpha: num(r, "potential", "set_alpha")?,
                    dim: 1,
                },
                "envelope" => ExceptionalSet::Envelope {
                    c: num(r, "potential", "c")?,
                    theta: num(r, "potential", "theta")?,
                },
                other => return Err(parse_error(set_e.line, &set_e.content, format!("unknown exceptional set `{other}`"))),
            };
            PotentialSpec::irregular(
                lambda()?,
                set,
                num(r, "potential", "level")?,
                num(r, "potential", "threshold")?,
            )
        }
        "custom" => {
            let e = lookup(r, "table").ok_or_else(|| missing("potential", "table"))?;
            PotentialSpec::new(PotentialFamily::Custom { table: parse_pairs(e)? })
        }
        other => return Err(parse_error(fam.line, &fam.content, format!("unknown potential family `{other}`"))),
    };
    let p = p.shifted(num(r, "potential", "offset")?);
    p.validate()?;
    Ok(p)
}

fn echo_section(out: &mut String, name: &str, r: &[(String, Entry)]) {
    let _ = writeln!(out, "[{name}]");
    for (k, e) in r {
        let _ = writeln!(out, "{k} = {}", e.value);
    }
    out.push('\n');
}

impl Scenario {
    pub fn from_config(cfg: &Config) -> Result<Scenario> {
        let names = |s: &[(&'static str, Option<&'static str>)]| s.iter().map(|p| p.0).collect::<Vec<_>>();
        check_keys(cfg, "scenario", &names(SCENARIO_KEYS))?;
        check_keys(cfg, "kernel", &names(KERNEL_KEYS))?;
        check_keys(cfg, "potential", &names(POTENTIAL_KEYS))?;
        let sc = resolve(cfg, "scenario", SCENARIO_KEYS);
        let id = lookup(&sc, "id").ok_or_else(|| missing("scenario", "id"))?.value.clone();
        if id.is_empty() || id.contains(['/', '\\']) || id.starts_with('.') {
            let e = lookup(&sc, "id").unwrap();
            return Err(parse_error(e.line, &e.content, "id must be a plain file name"));
        }
        let te = lookup(&sc, "task").ok_or_else(|| missing("scenario", "task"))?;
        let task = Task::from_name(&te.value).ok_or_else(|| parse_error(te.line, &te.content, format!("unknown task `{}`", te.value)))?;
        let cap_e = lookup(&sc, "grid_cap").unwrap();
        let grid_cap = cap_e
            .value
            .parse()
            .map_err(|_| parse_error(cap_e.line, &cap_e.content, "`grid_cap` expects a positive integer"))?;
        let task_keys: Vec<&str> = task.schema().iter().map(|p| p.0).collect();
        check_keys(cfg, "task", &task_keys)?;
        let task_schema: Vec<(&str, Option<&str>)> = task.schema().iter().map(|&(k, d)| (k, Some(d))).collect();
        let kr = resolve(cfg, "kernel", KERNEL_KEYS);
        let pr = resolve(cfg, "potential", POTENTIAL_KEYS);
        let tr = resolve(cfg, "task", &task_schema);
        let mut grid = Vec::new();
        if let Some(s) = cfg.section("grid") {
            for e in &s.entries {
                let bad = |m: String| parse_error(e.line, &e.content, m);
                let (sec, key) = e.key.split_once('.').ok_or_else(|| bad("grid keys are `section.key`".into()))?;
                let ok = match sec {
                    "kernel" => names(KERNEL_KEYS).contains(&key),
                    "potential" => names(POTENTIAL_KEYS).contains(&key),
                    "task" => task_keys.contains(&key),
                    _ => false,
                };
                if !ok {
                    return Err(bad(format!("unknown grid parameter `{}`", e.key)));
                }
                let values: Vec<String> = e.value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
                if values.is_empty() {
                    return Err(bad("grid parameter needs at least one value".into()));
                }
                grid.push((e.key.clone(), values));
            }
        }
        let kernel = kernel_from(&kr)?;
        let pot = potential_from(&pr)?;
        let mut echo = String::new();
        echo_section(&mut echo, "scenario", &sc);
        echo_section(&mut echo, "kernel", &kr);
        echo_section(&mut echo, "potential", &pr);
        echo_section(&mut echo, "task", &tr);
        if !grid.is_empty() {
            let _ = writeln!(echo, "[grid]");
            for (k, v) in &grid {
                let _ = writeln!(echo, "{k} = {}", v.join(", "));
            }
            echo.push('\n');
        }
        Ok(Scenario {
            id,
            task,
            kernel,
            pot,
            params: Params {
                values: tr.into_iter().collect(),
            },
            grid,
            grid_cap,
            echo,
        })
    }

    /// Number of points in the Cartesian product of the grid.
    pub fn grid_size(&self) -> usize {
        self.grid.iter().map(|(_, v)| v.len()).product()
    }
}

/// Configs for every grid point, each with its `(parameter, value)` assignment.
pub fn expand_grid(cfg: &Config, sc: &Scenario) -> Result<Vec<(Vec<(String, String)>, Config)>> {
    let size = sc.grid_size();
    if size > sc.grid_cap {
        return Err(Error::Refused(format!("grid has {size} points, cap is {}", sc.grid_cap)));
    }
    let mut out = Vec::with_capacity(size);
    for idx in 0..size {
        let mut rem = idx;
        let mut point = Vec::new();
        let mut c = cfg.clone();
        c.sections.retain(|s| s.name != "grid");
        for (key, values) in sc.grid.iter().rev() {
            let v = &values[rem % values.len()];
            rem /= values.len();
            let (sec, k) = key.split_once('.').unwrap();
            c.set(sec, k, v);
            point.push((key.clone(), v.clone()));
        }
        point.reverse();
        out.push((point, c));
    }
    Ok(out)
}
