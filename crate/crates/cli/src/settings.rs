//! Run settings from a `key=value` file and command-line flags. Flags win.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gjms_core::lane_emden::Nonlinearity;

use crate::error::{usage, CliError, CliResult};

/// Every recognised key. Flags use the same names with a `--` prefix.
pub const KEYS: &[&str] = &[
    "m", "n", "p", "f", "K", "Q", "starts", "seed", "tol", "max-iter", "init", "method", "lambda", "only", "out",
    "format",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Origin {
    File { path: String, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Origin)>,
}

fn canonical(key: &str) -> Option<&'static str> {
    let key = key.replace('_', "-");
    KEYS.iter().copied().find(|k| *k == key)
}

impl Settings {
    /// Reads `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::File {
                path: source.to_string(),
                line: i + 1,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{origin}: expected key=value, got `{line}`")))?;
            let key = key.trim();
            let canon = canonical(key).ok_or_else(|| usage(format!("{origin}: unknown field `{key}`")))?;
            out.values.insert(canon, (value.trim().to_string(), origin));
        }
        Ok(out)
    }

    pub fn set_flag(&mut self, key: &str, value: &str) {
        let canon = canonical(key).unwrap_or_else(|| panic!("flag `{key}` missing from KEYS"));
        self.values.insert(canon, (value.trim().to_string(), Origin::Flag));
    }

    /// Keys given on the command line.
    pub fn flags(&self) -> Vec<&'static str> {
        self.values
            .iter()
            .filter(|(_, (_, o))| *o == Origin::Flag)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Usage error pointing at where `key` was set.
    pub fn invalid(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.values.get(key) {
            Some((value, origin)) => usage(format!("{origin}: field `{key}` = `{value}`: {msg}")),
            None => usage(format!("field `{key}`: {msg}")),
        }
    }

    pub fn required<T>(&self, key: &str, value: Option<T>) -> CliResult<T> {
        value.ok_or_else(|| {
            usage(format!(
                "missing required field `{key}` (flag --{key} or `{key} = ...` in config)"
            ))
        })
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.text(key)
            .map(|v| v.parse::<usize>().map_err(|e| self.invalid(key, e)))
            .transpose()
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.text(key)
            .map(|v| v.parse::<u64>().map_err(|e| self.invalid(key, e)))
            .transpose()
    }

    pub fn real(&self, key: &str) -> CliResult<Option<f64>> {
        self.text(key)
            .map(|v| parse_real(v).map_err(|e| self.invalid(key, e)))
            .transpose()
    }

    /// Comma separated list; an empty value is an empty list.
    pub fn reals(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.text(key)
            .map(|v| {
                split_list(v)
                    .map(parse_real)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| self.invalid(key, e))
            })
            .transpose()
    }

    pub fn usizes(&self, key: &str) -> CliResult<Option<Vec<usize>>> {
        self.text(key)
            .map(|v| {
                split_list(v)
                    .map(|s| s.parse::<usize>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| self.invalid(key, e))
            })
            .transpose()
    }

    pub fn nonlinearity(&self) -> CliResult<Option<Nonlinearity<f64>>> {
        self.text("f")
            .map(|v| v.parse::<Nonlinearity<f64>>().map_err(|e| self.invalid("f", e)))
            .transpose()
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// A finite real, either a decimal or a fraction `a/b`.
pub fn parse_real(v: &str) -> Result<f64, String> {
    let v = v.trim();
    let x = match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
            a / b
        }
        None => v.parse().map_err(|e| format!("`{v}`: {e}"))?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not a finite number"))
    }
}
