//! Experiment configuration files.
//!
//! The format is line oriented. Blank lines and lines starting with `#` are
//! ignored; every other line is `key = value`. Lists are written in square
//! brackets on a single line, and commas nested inside parentheses belong to
//! the element:
//!
//! ```text
//! arms        = [gaussian(0,4), gaussian(0,1)]
//! strategies  = [ch-as, b-as(a=0.5, delta=1e-7), gafs-max]
//! n           = [100, 1000]
//! runs        = 10000
//! seed        = 42
//! sigma_bar   = 5
//! out         = results.csv
//! bounds_out  = bounds.csv
//! check_events = false
//! emit_bounds  = false
//! ```
//!
//! `arms`, `strategies` and `n` are required. `runs` defaults to 10000.
//! When `seed` is absent the `ALLOC_BANDIT_SEED` environment variable is used,
//! then 0. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use alloc_bandit::{ArmSpec, BanditInstance, StrategyParams};
use thiserror::Error;

pub const DEFAULT_RUNS: u64 = 10_000;
pub const SEED_ENV: &str = "ALLOC_BANDIT_SEED";

const KEYS: &[&str] = &[
    "arms",
    "strategies",
    "n",
    "runs",
    "seed",
    "sigma_bar",
    "out",
    "bounds_out",
    "check_events",
    "emit_bounds",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Validation { field: &'static str, message: String },
}

/// A complete, validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: BanditInstance,
    /// Upper bound on the sum of variances, used by the bound evaluators.
    pub sigma_bar: Option<f64>,
    pub strategies: Vec<StrategyParams>,
    pub n_grid: Vec<u64>,
    pub runs: u64,
    pub master_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub bounds_out: Option<PathBuf>,
    pub check_events: bool,
    pub emit_bounds: bool,
}

impl ExperimentSpec {
    /// The configured seed, falling back to `ALLOC_BANDIT_SEED`, then 0.
    pub fn seed(&self) -> Result<u64, ConfigError> {
        if let Some(s) = self.master_seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| ConfigError::Validation {
                field: "seed",
                message: format!("{SEED_ENV}=`{v}` is not an unsigned integer"),
            }),
            Err(_) => Ok(0),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, message: String| Err(ConfigError::Validation { field, message });
        if self.strategies.is_empty() {
            return invalid("strategies", "at least one strategy is required".into());
        }
        if self.n_grid.is_empty() {
            return invalid("n", "at least one budget is required".into());
        }
        let min = 2 * self.instance.k() as u64;
        if let Some(n) = self.n_grid.iter().find(|&&n| n < min) {
            return invalid("n", format!("budget {n} is below 2K = {min}"));
        }
        if self.runs < 2 {
            return invalid("runs", format!("need at least 2 runs, got {}", self.runs));
        }
        if let Some(s) = self.sigma_bar {
            if !(s.is_finite() && s > 0.0) {
                return invalid("sigma_bar", format!("must be > 0, got {s}"));
            }
        }
        Ok(())
    }

    /// Renders the spec in the config syntax; [`parse_config`] reads it back
    /// to an equal spec.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let list = |items: Vec<String>| format!("[{}]", items.join(", "));
        let arms = self.instance.arms().iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "arms = {}", list(arms));
        let strategies = self.strategies.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "strategies = {}", list(strategies));
        let ns = self.n_grid.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "n = {}", list(ns));
        let _ = writeln!(out, "runs = {}", self.runs);
        if let Some(s) = self.master_seed {
            let _ = writeln!(out, "seed = {s}");
        }
        if let Some(s) = self.sigma_bar {
            let _ = writeln!(out, "sigma_bar = {s}");
        }
        if let Some(p) = &self.out {
            let _ = writeln!(out, "out = {}", p.display());
        }
        if let Some(p) = &self.bounds_out {
            let _ = writeln!(out, "bounds_out = {}", p.display());
        }
        let _ = writeln!(out, "check_events = {}", self.check_events);
        let _ = writeln!(out, "emit_bounds = {}", self.emit_bounds);
        out
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `key=value` overrides as if they replaced the
/// matching line of the file.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[String],
) -> Result<ExperimentSpec, ConfigError> {
    let mut entries: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = split_entry(trimmed).map_err(|message| ConfigError::Parse { line, message })?;
        let key = known_key(key).ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("unknown key `{key}`"),
        })?;
        if let Some((first, _)) = entries.insert(key, (line, value.to_string())) {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` already set on line {first}"),
            });
        }
    }
    for (i, ov) in overrides.iter().enumerate() {
        let message = |m: String| ConfigError::Parse {
            line: 0,
            message: format!("override #{} `{ov}`: {m}", i + 1),
        };
        let (key, value) = split_entry(ov).map_err(message)?;
        let key = known_key(key).ok_or_else(|| message(format!("unknown key `{key}`")))?;
        entries.insert(key, (0, value.to_string()));
    }

    let field = |key: &str| entries.get(key).map(|(l, v)| (*l, v.as_str()));
    let required = |key: &'static str| {
        field(key).ok_or(ConfigError::Validation {
            field: key,
            message: "missing".into(),
        })
    };
    let err = |line: usize, m: String| ConfigError::Parse { line, message: m };

    let (line, v) = required("arms")?;
    let arms = split_list(v)
        .map_err(|m| err(line, m))?
        .iter()
        .map(|s| s.parse::<ArmSpec>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::Validation {
            field: "arms",
            message: e.to_string(),
        })?;

    let sigma_bar = field("sigma_bar")
        .map(|(l, v)| parse_num::<f64>(v).map_err(|m| err(l, m)))
        .transpose()?;

    let instance = BanditInstance::with_sigma_bar(arms, sigma_bar).map_err(|e| ConfigError::Validation {
        field: "arms",
        message: e.to_string(),
    })?;

    let (line, v) = required("strategies")?;
    let strategies = split_list(v)
        .map_err(|m| err(line, m))?
        .iter()
        .map(|s| s.parse::<StrategyParams>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::Validation {
            field: "strategies",
            message: e.to_string(),
        })?;

    let (line, v) = required("n")?;
    let n_grid = split_list(v)
        .map_err(|m| err(line, m))?
        .iter()
        .map(|s| parse_num::<u64>(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|m| err(line, m))?;

    let runs = field("runs")
        .map(|(l, v)| parse_num::<u64>(v).map_err(|m| err(l, m)))
        .transpose()?
        .unwrap_or(DEFAULT_RUNS);
    let master_seed = field("seed")
        .map(|(l, v)| parse_num::<u64>(v).map_err(|m| err(l, m)))
        .transpose()?;
    let path = |key| field(key).map(|(_, v)| PathBuf::from(v));
    let flag = |key| {
        field(key)
            .map(|(l, v)| parse_bool(v).map_err(|m| err(l, m)))
            .transpose()
            .map(Option::unwrap_or_default)
    };

    let spec = ExperimentSpec {
        instance,
        sigma_bar,
        strategies,
        n_grid,
        runs,
        master_seed,
        out: path("out"),
        bounds_out: path("bounds_out"),
        check_events: flag("check_events")?,
        emit_bounds: flag("emit_bounds")?,
    };
    spec.validate()?;
    Ok(spec)
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

fn split_entry(s: &str) -> Result<(&str, &str), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, got `{s}`"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err("empty key".into());
    }
    if v.is_empty() {
        return Err(format!("`{k}` has no value"));
    }
    Ok((k, v))
}

/// Splits `[a, b(c, d), e]` into its top-level elements.
fn split_list(v: &str) -> Result<Vec<String>, String> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("expected a [list], got `{v}`"))?;
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced ')' in `{v}`"));
        }
        cur.push(c);
    }
    if depth != 0 {
        return Err(format!("unbalanced '(' in `{v}`"));
    }
    items.push(cur);
    let items: Vec<String> = items.into_iter().map(|s| s.trim().to_string()).collect();
    if items.len() == 1 && items[0].is_empty() {
        return Ok(Vec::new());
    }
    if items.iter().any(String::is_empty) {
        return Err(format!("empty list element in `{v}`"));
    }
    Ok(items)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a valid {}", s.trim(), std::any::type_name::<T>()))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc_bandit::StrategyKind;

    const MINIMAL: &str = "arms = [gaussian(0,4), gaussian(0,1)]\nstrategies = [b-as]\nn = [1000]\n";

    #[test]
    fn minimal_config() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.instance.k(), 2);
        assert_eq!(spec.instance.summary().sigma, 5.0);
        assert_eq!(spec.instance.summary().lambda_min, 0.2);
        assert_eq!(spec.strategies[0].kind, StrategyKind::BAs);
        assert_eq!(spec.n_grid, vec![1000]);
        assert_eq!(spec.runs, DEFAULT_RUNS);
        assert!(!spec.check_events);
    }

    #[test]
    fn full_config() {
        let text = "# fig 3 left\n\
            arms = [gaussian(0,4), rademacher]\n\
            strategies = [ch-as, b-as(a=0.5, delta=1e-7), gafs-max]\n\
            n = [100, 200]\n\
            runs = 50\n\
            seed = 9\n\
            sigma_bar = 6\n\
            out = r.csv\n\
            emit_bounds = true\n";
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.strategies.len(), 3);
        assert_eq!(spec.strategies[1].a_override, Some(0.5));
        assert_eq!(spec.master_seed, Some(9));
        assert_eq!(spec.sigma_bar, Some(6.0));
        assert_eq!(spec.out, Some(PathBuf::from("r.csv")));
        assert!(spec.emit_bounds);
    }

    #[test]
    fn negative_variance_rejected() {
        let e = parse_config("arms = [gaussian(0,-4)]\nstrategies = [uniform]\nn = [10]\n").unwrap_err();
        assert!(matches!(e, ConfigError::Validation { field: "arms", .. }), "{e}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("arms = [uniform01]\n\nbogus = 3\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Parse {
                line: 3,
                message: "unknown key `bogus`".into()
            }
        );
        let e = parse_config(&format!("{MINIMAL}runs = many\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 4, .. }));
        let e = parse_config(&format!("{MINIMAL}n = [5]\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 4, .. }));
        let e = parse_config("arms [uniform01]\n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn validation_names_field() {
        let e = parse_config("arms = [gaussian(0,1), gaussian(0,1)]\nstrategies = [ch-as]\nn = [3]\n").unwrap_err();
        assert!(matches!(e, ConfigError::Validation { field: "n", .. }));
        let e = parse_config(&format!("{MINIMAL}runs = 1\n")).unwrap_err();
        assert!(matches!(e, ConfigError::Validation { field: "runs", .. }));
        let e = parse_config("arms = [uniform01]\nn = [10]\n").unwrap_err();
        assert!(matches!(e, ConfigError::Validation { field: "strategies", .. }));
        let e = parse_config("arms = [uniform01]\nstrategies = [ucb]\nn = [10]\n").unwrap_err();
        assert!(matches!(e, ConfigError::Validation { field: "strategies", .. }));
    }

    #[test]
    fn overrides_replace_lines() {
        let spec = parse_config_with_overrides(MINIMAL, &["runs=20".into(), "n = [10, 20]".into()]).unwrap();
        assert_eq!(spec.runs, 20);
        assert_eq!(spec.n_grid, vec![10, 20]);
        assert!(parse_config_with_overrides(MINIMAL, &["nope=1".into()]).is_err());
    }

    #[test]
    fn nested_list_split() {
        assert_eq!(
            split_list("[a, b(c, d), e]").unwrap(),
            vec!["a".to_string(), "b(c, d)".into(), "e".into()]
        );
        assert!(split_list("[a, b(c]").is_err());
        assert!(split_list("[a,,b]").is_err());
        assert!(split_list("a, b").is_err());
    }
}
