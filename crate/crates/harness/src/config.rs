//! Flat `key = value` configuration with per-command keys and defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GraphScan,
    GraphCritical,
    MutualInfo,
    Purify,
    CliffordScan,
    CliffordPurify,
    Couplings,
    RbimMc,
    Verify,
}

type Keys = &'static [(&'static str, Option<&'static str>)];

const GRAPH_SCAN: Keys = &[
    ("q", Some("2")),
    ("lx", Some("32,64,128")),
    ("ly", None),
    ("bc", Some("periodic")),
    ("window", None),
    ("samples", Some("200")),
    ("seed", Some("1")),
    ("px", Some("0.90:0.99:0.01")),
    ("ratio", Some("0.25")),
    ("starts", Some("4")),
    ("intervals", Some("ratio")),
    ("out", Some("graph-scan")),
];

const GRAPH_CRITICAL: Keys = &[
    ("q", Some("2")),
    ("lx", Some("128")),
    ("ly", None),
    ("bc", Some("periodic")),
    ("window", None),
    ("samples", Some("100")),
    ("seed", Some("1")),
    ("px", Some("0.95")),
    ("starts", Some("4")),
    ("out", Some("graph-critical")),
];

const MUTUAL_INFO: Keys = &[
    ("q", Some("2")),
    ("lx", Some("128")),
    ("ly", None),
    ("window", None),
    ("samples", Some("100")),
    ("pairs", Some("100")),
    ("seed", Some("1")),
    ("px", Some("0.95")),
    ("min-count", Some("20")),
    ("out", Some("mutual-info")),
];

const PURIFY: Keys = &[
    ("q", Some("2")),
    ("lx", Some("32,64")),
    ("heights", Some("4:64:4")),
    ("bc", Some("periodic")),
    ("window", None),
    ("samples", Some("200")),
    ("seed", Some("1")),
    ("px", Some("0.95")),
    ("drop-first", Some("1")),
    ("min-x", Some("0")),
    ("min-nonzero", Some("10")),
    ("out", Some("purify")),
];

const CLIFFORD_SCAN: Keys = &[
    ("t", Some("2")),
    ("lx", Some("32,64,128")),
    ("ly", None),
    ("bc", Some("periodic")),
    ("window", None),
    ("samples", Some("200")),
    ("seed", Some("1")),
    ("p", Some("0.70:0.79:0.01")),
    ("ratio", Some("0.25")),
    ("starts", Some("4")),
    ("intervals", Some("ratio")),
    ("out", Some("clifford-scan")),
];

const CLIFFORD_PURIFY: Keys = &[
    ("t", Some("2")),
    ("lx", Some("32,64")),
    ("tau", Some("0.125:3:0.125")),
    ("heights", None),
    ("bc", Some("periodic")),
    ("window", None),
    ("samples", Some("200")),
    ("seed", Some("1")),
    ("p", Some("0.744")),
    ("drop-first", Some("0")),
    ("min-x", Some("3.141592653589793")),
    ("min-nonzero", Some("10")),
    ("out", Some("clifford-purify")),
];

const COUPLINGS: Keys = &[("q", Some("2")), ("out", Some("couplings"))];

const RBIM_MC: Keys = &[
    ("l", Some("16,32")),
    ("k", None),
    ("coupling-q", None),
    ("pbond", Some("1")),
    ("sweeps", Some("2000")),
    ("burn-in", Some("200")),
    ("realizations", Some("16")),
    ("update", Some("sw")),
    ("seed", Some("1")),
    ("out", Some("rbim-mc")),
];

const VERIFY: Keys = &[
    ("q", Some("2")),
    ("lx", Some("8")),
    ("ops", Some("60")),
    ("cases", Some("100")),
    ("seed", Some("1")),
    ("out", Some("verify")),
];

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GraphScan => "graph-scan",
            Command::GraphCritical => "graph-critical",
            Command::MutualInfo => "mutual-info",
            Command::Purify => "purify",
            Command::CliffordScan => "clifford-scan",
            Command::CliffordPurify => "clifford-purify",
            Command::Couplings => "couplings",
            Command::RbimMc => "rbim-mc",
            Command::Verify => "verify",
        }
    }

    pub fn keys(self) -> Keys {
        match self {
            Command::GraphScan => GRAPH_SCAN,
            Command::GraphCritical => GRAPH_CRITICAL,
            Command::MutualInfo => MUTUAL_INFO,
            Command::Purify => PURIFY,
            Command::CliffordScan => CLIFFORD_SCAN,
            Command::CliffordPurify => CLIFFORD_PURIFY,
            Command::Couplings => COUPLINGS,
            Command::RbimMc => RBIM_MC,
            Command::Verify => VERIFY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<mipt_core::Error> for ConfigError {
    fn from(e: mipt_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`, got `{line}`", n + 1));
        };
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k.is_empty() || v.is_empty() {
            return err(format!("line {}: empty key or value", n + 1));
        }
        out.push((k, v.to_string()));
    }
    Ok(out)
}

/// Resolved settings: defaults, then the config file, then flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(
        command: Command,
        file: Option<&Path>,
        flags: &[(&'static str, Option<String>)],
    ) -> Result<Self, ConfigError> {
        let keys = command.keys();
        let mut values: BTreeMap<String, String> =
            keys.iter().filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string()))).collect();
        let known = |k: &str| keys.iter().any(|(name, _)| *name == k);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_file(&text)? {
                if !known(&k) {
                    return err(format!("config key `{k}` is not used by {}", command.name()));
                }
                values.insert(k, v);
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                if !known(k) {
                    return err(format!("--{k} is not used by {}", command.name()));
                }
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Settings { command, values })
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError(format!("missing `{key}`")))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| ConfigError(format!("bad value `{v}` for `{key}`")))
    }

    pub fn parse_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key).map(|_| self.parse(key)).transpose()
    }

    /// Comma-separated integers or an inclusive `start:stop:step` range.
    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let v = self.required(key)?;
        let bad = || ConfigError(format!("bad list `{v}` for `{key}`"));
        let list: Vec<usize> = if let [a, b, s] = v.split(':').collect::<Vec<_>>()[..] {
            let (a, b, s): (usize, usize, usize) =
                (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, s.parse().map_err(|_| bad())?);
            if s == 0 || b < a {
                return Err(bad());
            }
            (a..=b).step_by(s).collect()
        } else {
            v.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        if list.is_empty() {
            return Err(bad());
        }
        Ok(list)
    }

    /// Comma-separated reals or an inclusive `start:stop:step` range.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.required(key)?;
        let bad = || ConfigError(format!("bad list `{v}` for `{key}`"));
        let num = |x: &str| -> Result<f64, ConfigError> {
            x.trim().parse::<f64>().ok().filter(|f| f.is_finite()).ok_or_else(bad)
        };
        let list: Vec<f64> = if let [a, b, s] = v.split(':').collect::<Vec<_>>()[..] {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if s <= 0.0 || b < a {
                return Err(bad());
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            // rounded so that 0.90:0.99:0.01 gives 0.93, not 0.9300000000000002
            (0..=n).map(|i| ((a + i as f64 * s) * 1e12).round() / 1e12).collect()
        } else {
            v.split(',').map(num).collect::<Result<_, _>>()?
        };
        if list.is_empty() {
            return Err(bad());
        }
        Ok(list)
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, ConfigError> {
        let v = self.required(key)?;
        options
            .iter()
            .find(|o| **o == v)
            .copied()
            .ok_or_else(|| ConfigError(format!("`{key}` must be one of {}, got `{v}`", options.join("|"))))
    }
}
