//! Sectioned `key = value` scenario files.
//!
//! ```text
//! # comment
//! [scenario]
//! id = stable-logpower
//! task = classify
//!
//! [kernel]
//! family = stable
//! alpha = 1
//!
//! [potential]
//! family = logpower
//! lambda = 2
//!
//! [task]
//! scan = true
//!
//! [grid]
//! potential.lambda = 0.5, 1, 2
//! ```
//!
//! Keys before the first header belong to `[scenario]`. Everything after `#` is a comment.
//! List values are comma separated; `u:v` pairs are used for tables.

use crate::error::{Error, Result};

pub const SECTIONS: [&str; 5] = ["scenario", "kernel", "potential", "task", "grid"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub sections: Vec<Section>,
}

impl Config {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.section(section).and_then(|s| s.get(key))
    }

    /// Sets `key` in `section`, keeping the line of an existing entry.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        let idx = match self.sections.iter().position(|s| s.name == section) {
            Some(i) => i,
            None => {
                self.sections.push(Section {
                    name: section.to_string(),
                    entries: Vec::new(),
                });
                self.sections.len() - 1
            }
        };
        let s = &mut self.sections[idx];
        match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value.to_string(),
            None => s.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
                content: format!("{key} = {value}"),
            }),
        }
    }
}

pub(crate) fn parse_error(line: usize, content: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        content: content.to_string(),
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut current = "scenario".to_string();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(parse_error(line, raw.trim(), "unterminated section header"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(parse_error(line, raw.trim(), format!("unknown section `{name}`")));
            }
            if cfg.section(name).is_some_and(|s| !s.entries.is_empty()) {
                return Err(parse_error(line, raw.trim(), format!("section `{name}` appears twice")));
            }
            current = name.to_string();
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(parse_error(line, raw.trim(), "expected `key = value`"));
        };
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() {
            return Err(parse_error(line, raw.trim(), "empty key"));
        }
        if cfg.get(&current, key).is_some() {
            return Err(parse_error(line, raw.trim(), format!("duplicate key `{key}`")));
        }
        if cfg.section(&current).is_none() {
            cfg.sections.push(Section {
                name: current.clone(),
                entries: Vec::new(),
            });
        }
        let s = cfg.sections.iter_mut().find(|s| s.name == current).unwrap();
        s.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            content: raw.trim().to_string(),
        });
    }
    Ok(cfg)
}

pub fn parse_f64(e: &Entry) -> Result<f64> {
    e.value
        .parse::<f64>()
        .map_err(|_| parse_error(e.line, &e.content, format!("`{}` expects a number", e.key)))
}

pub fn parse_list(e: &Entry) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| parse_error(e.line, &e.content, format!("`{}` expects a comma-separated list of numbers", e.key)))
        })
        .collect()
}

pub fn parse_pairs(e: &Entry) -> Result<Vec<(f64, f64)>> {
    e.value
        .split(',')
        .map(|s| {
            let bad = || parse_error(e.line, &e.content, format!("`{}` expects `u:v` pairs", e.key));
            let (a, b) = s.trim().split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let c = parse("id = a # name\n\n[kernel]\nfamily = stable\n[grid]\npotential.lambda = 1, 2\n").unwrap();
        assert_eq!(c.get("scenario", "id").unwrap().value, "a");
        assert_eq!(c.get("kernel", "family").unwrap().line, 4);
        assert_eq!(parse_list(c.get("grid", "potential.lambda").unwrap()).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn errors_carry_line() {
        match parse("[kernel]\nalpha 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("[kernels]\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a = 1\na = 2\n"), Err(Error::Parse { line: 2, .. })));
    }
}
