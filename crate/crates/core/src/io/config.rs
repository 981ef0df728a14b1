//! Flat `key = value` configuration, one assignment per line, `#` comments.

use std::path::PathBuf;

use thiserror::Error;

use crate::model::Params;
use crate::timestepping::{InitialPhi, RunOptions};

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "scheme",
    "nx",
    "dt",
    "t_end",
    "epsilon",
    "mu1",
    "mu4",
    "mu5",
    "lambda",
    "gamma",
    "x_min",
    "x_max",
    "y_min",
    "y_max",
    "tol_picard",
    "max_picard",
    "tol_lin",
    "out_every",
    "out_dir",
    "snapshots",
    "override_solvability",
    "initial_phi",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Params,
    pub out_dir: PathBuf,
    pub snapshots: bool,
    pub override_solvability: bool,
    pub initial_phi: InitialPhi,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Params::default(),
            out_dir: PathBuf::from("out"),
            snapshots: true,
            override_solvability: false,
            initial_phi: InitialPhi::SinCos2,
        }
    }
}

impl RunConfig {
    pub fn run_options(&self) -> RunOptions {
        RunOptions { initial: Some(self.initial_phi), override_solvability: self.override_solvability }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    /// 1-based line in the document; `None` for command-line overrides and
    /// whole-config checks.
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub line: Option<usize>,
    pub key: String,
    pub value: String,
}

impl Assignment {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self { line: None, key: key.into(), value: value.into() }
    }
}

/// Splits a document into assignments. Later assignments of a key win.
pub fn parse_assignments(text: &str) -> Result<Vec<Assignment>, Vec<ConfigError>> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                out.push(Assignment { line: Some(i + 1), key: k.trim().to_string(), value: v.trim().to_string() })
            }
            _ => errs.push(ConfigError {
                line: Some(i + 1),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            }),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Parses and fully validates a document.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    RunConfig::from_assignments(&parse_assignments(text)?)
}

fn value<T: std::str::FromStr>(a: &Assignment, what: &str) -> Result<T, ConfigError> {
    a.value.parse().map_err(|_| ConfigError {
        line: a.line,
        key: a.key.clone(),
        message: format!("cannot parse '{}' as {what}", a.value),
    })
}

fn flag(a: &Assignment) -> Result<bool, ConfigError> {
    match a.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError { line: a.line, key: a.key.clone(), message: format!("'{}' is not a boolean", a.value) }),
    }
}

impl RunConfig {
    /// Applies assignments over the defaults, then validates.
    pub fn from_assignments(assignments: &[Assignment]) -> Result<Self, Vec<ConfigError>> {
        let mut c = RunConfig::default();
        let mut errs = Vec::new();
        let mut lines = std::collections::HashMap::new();
        for a in assignments {
            let r: Result<(), ConfigError> = (|| {
                let p = &mut c.params;
                match a.key.as_str() {
                    "scheme" => p.scheme = a.value.parse().map_err(|e| ConfigError {
                        line: a.line,
                        key: a.key.clone(),
                        message: format!("{e}"),
                    })?,
                    "nx" => p.nx = value(a, "a positive integer")?,
                    "dt" => p.dt = value(a, "a number")?,
                    "t_end" => p.t_end = value(a, "a number")?,
                    "epsilon" => p.epsilon = value(a, "a number")?,
                    "mu1" => p.mu1 = value(a, "a number")?,
                    "mu4" => p.mu4 = value(a, "a number")?,
                    "mu5" => p.mu5 = value(a, "a number")?,
                    "lambda" => p.lambda = value(a, "a number")?,
                    "gamma" => p.gamma = value(a, "a number")?,
                    "x_min" => p.bounds.x_min = value(a, "a number")?,
                    "x_max" => p.bounds.x_max = value(a, "a number")?,
                    "y_min" => p.bounds.y_min = value(a, "a number")?,
                    "y_max" => p.bounds.y_max = value(a, "a number")?,
                    "tol_picard" => p.tol_picard = value(a, "a number")?,
                    "max_picard" => p.max_picard = value(a, "a positive integer")?,
                    "tol_lin" => p.tol_lin = value(a, "a number")?,
                    "out_every" => p.out_every = value(a, "a positive integer")?,
                    "out_dir" => c.out_dir = PathBuf::from(&a.value),
                    "snapshots" => c.snapshots = flag(a)?,
                    "override_solvability" => c.override_solvability = flag(a)?,
                    "initial_phi" => c.initial_phi = a.value.parse().map_err(|e| ConfigError {
                        line: a.line,
                        key: a.key.clone(),
                        message: format!("{e}"),
                    })?,
                    _ => {
                        return Err(ConfigError { line: a.line, key: a.key.clone(), message: "unknown key".into() })
                    }
                }
                Ok(())
            })();
            match r {
                Ok(()) => {
                    lines.insert(a.key.as_str(), a.line);
                }
                Err(e) => errs.push(e),
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let line_of = |k: &str| lines.get(k).copied().flatten();
        if let Err(v) = c.params.validate() {
            errs.extend(v.into_iter().map(|e| {
                let key = if e.key == "bounds" { "x_min" } else { e.key };
                ConfigError { line: line_of(key), key: e.key.to_string(), message: e.message }
            }));
        } else if c.params.violates_solvability() && !c.override_solvability {
            errs.push(ConfigError {
                line: line_of("dt"),
                key: "dt".into(),
                message: format!(
                    "dt = {:e} violates the od2 solvability condition dt < 2 epsilon^2 / gamma = {:e} \
                     (set override_solvability = true to run anyway)",
                    c.params.dt,
                    crate::model::round_sig(c.params.solvability_bound())
                ),
            });
        }
        if errs.is_empty() {
            Ok(c)
        } else {
            Err(errs)
        }
    }
}
