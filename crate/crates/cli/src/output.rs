//! CSV series, acceptance checks and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nrwa_core::config::ParamValue;
use serde::Serialize;

/// One CSV column. Frequencies are divided by 2π by the caller.
pub enum Column<'a> {
    Real(&'a str, &'a [f64]),
    Flag(&'a str, &'a [bool]),
}

impl Column<'_> {
    fn name(&self) -> &str {
        match self {
            Column::Real(n, _) | Column::Flag(n, _) => n,
        }
    }

    fn len(&self) -> usize {
        match self {
            Column::Real(_, v) => v.len(),
            Column::Flag(_, v) => v.len(),
        }
    }

    fn push(&self, k: usize, out: &mut String) {
        match self {
            Column::Real(_, v) => write!(out, "{:.12e}", v[k]).unwrap(),
            Column::Flag(_, v) => out.push(if v[k] { '1' } else { '0' }),
        }
    }
}

/// Renders `t_ns` followed by `columns`.
pub fn render_csv(t: &[f64], columns: &[Column<'_>]) -> String {
    for c in columns {
        assert_eq!(c.len(), t.len(), "column `{}` has the wrong length", c.name());
    }
    let mut s = String::with_capacity(t.len() * 20 * (columns.len() + 1));
    s.push_str("t_ns");
    for c in columns {
        s.push(',');
        s.push_str(c.name());
    }
    s.push('\n');
    for (k, tk) in t.iter().enumerate() {
        write!(s, "{tk:.12e}").unwrap();
        for c in columns {
            s.push(',');
            c.push(k, &mut s);
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable condition, e.g. `>= 0.999`.
    pub condition: String,
}

fn bound_text(b: f64) -> String {
    if b == 0.0 || !b.is_finite() || (1e-3..1e4).contains(&b.abs()) {
        b.to_string()
    } else {
        format!("{b:e}")
    }
}

impl Check {
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value >= bound, value, condition: format!(">= {}", bound_text(bound)) }
    }

    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value > bound, value, condition: format!("> {}", bound_text(bound)) }
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value < bound, value, condition: format!("< {}", bound_text(bound)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRecord {
    pub t0_ns: f64,
    pub tf_ns: f64,
    pub n_steps: usize,
    pub dt_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub version: String,
    /// Values actually used, in ns, rad/ns, rad/ns² and rad.
    pub parameters: BTreeMap<String, ParamValue>,
    pub grid: GridRecord,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub acceptance: Vec<Check>,
}

/// Collects files written during one run.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes `contents` to `name` and records it; rewriting a name keeps one entry.
    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        fs::write(self.root.join(name), contents)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}
