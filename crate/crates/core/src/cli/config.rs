//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Numeric values may be
//! written as products of powers, e.g. `2^-10` or `5*2^12`. Lists are
//! comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::{CliError, ErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Convergence,
    Stability,
    Check,
    ListSystems,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Convergence => "convergence",
            Command::Stability => "stability",
            Command::Check => "check",
            Command::ListSystems => "list-systems",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "convergence" => Ok(Command::Convergence),
            "stability" => Ok(Command::Stability),
            "check" => Ok(Command::Check),
            "list-systems" => Ok(Command::ListSystems),
            other => Err(CliError::config(format!("unknown command '{other}'"))),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "command",
    "system",
    "seed",
    "out",
    "workers",
    "x0",
    "scheme",
    // built-in parameters
    "mu",
    "sigma",
    "epsilon",
    // truncation policy
    "h",
    "exponent",
    "l",
    // simulate / convergence
    "delta",
    "horizon",
    "path",
    "q",
    "delta_ref",
    "deltas",
    "n_paths",
    "reference",
    // stability
    "p",
    "n_steps",
    "component",
    "sample_every",
    "lambda",
    // check
    "samples",
    "radius",
    "tol",
    "k",
];

/// Parses `a^b * c^d * ...` where every factor is a decimal number.
pub fn parse_number(text: &str) -> Result<f64, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::config("empty numeric value"));
    }
    let mut value = 1.0;
    for factor in text.split('*') {
        let factor = factor.trim();
        let mut parts = factor.splitn(2, '^');
        let base = parse_plain(parts.next().unwrap_or(""), text)?;
        value *= match parts.next() {
            Some(exp) => base.powf(parse_plain(exp, text)?),
            None => base,
        };
    }
    if value.is_nan() {
        return Err(CliError::config(format!("'{text}' is not a number")));
    }
    Ok(value)
}

fn parse_plain(s: &str, whole: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("'{whole}' is not a number")))
}

fn parse_count(text: &str) -> Result<usize, CliError> {
    let v = parse_number(text)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(CliError::config(format!("'{text}' is not a non-negative integer")))
    }
}

/// Parsed configuration: a validated key/value map plus CLI-level settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
    pub seed: u64,
    values: BTreeMap<String, String>,
}

pub const DEFAULT_SEED: u64 = 20_200_415;

impl RunConfig {
    /// Builds a config from file text, `key=value` overrides, and the CLI
    /// command (which must agree with any `command` key in the file).
    pub fn build(
        command: Option<Command>,
        text: &str,
        overrides: &[String],
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let mut values = parse_text(text)?;
        for item in overrides {
            let (k, v) = split_pair(item)
                .ok_or_else(|| CliError::config(format!("override '{item}' is not key=value")))?;
            check_key(&k)?;
            values.insert(k, v);
        }
        let file_command = values.get("command").map(|c| c.parse::<Command>()).transpose()?;
        let command = match (command, file_command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::config(format!(
                    "command '{a}' conflicts with config command '{b}'"
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(CliError::config("no command given")),
        };
        let seed = match seed {
            Some(s) => s,
            None => match values.get("seed") {
                Some(s) => s
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::config(format!("seed '{s}' is not a u64")))?,
                None => DEFAULT_SEED,
            },
        };
        let out_dir = out
            .or_else(|| values.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self {
            command,
            out_dir,
            seed,
            values,
        })
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        Self::build(None, text, &[], None, None)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(parse_number).transpose()
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.raw(key).map(parse_count).transpose()
    }

    pub fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.count(key)?.unwrap_or(default))
    }

    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|v| v.split(',').map(parse_number).collect())
            .transpose()
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::config(format!("missing required key '{key}'")))
    }
}

fn split_pair(line: &str) -> Option<(String, String)> {
    let (k, v) = line.split_once('=')?;
    let key = k.trim().to_ascii_lowercase();
    let key = if key == "t" { "horizon".to_string() } else { key };
    Some((key, v.trim().to_string()))
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::new(ErrorKind::Config, format!("unknown config key '{key}'")))
    }
}

fn parse_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut values = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_pair(line).ok_or_else(|| {
            CliError::config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        check_key(&key)?;
        if value.is_empty() {
            return Err(CliError::config(format!("line {}: empty value for '{key}'", lineno + 1)));
        }
        if values.insert(key.clone(), value).is_some() {
            return Err(CliError::config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(values)
}
