//! Flat `key = value` run configuration with layered sources.
//!
//! Layers are applied in order defaults < preset < file < env < flags. Every
//! key remembers where its effective value came from, and every replaced
//! value is kept as an [`Override`] so the manifest can show both.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown key `{key}` ({origin})")]
    UnknownKey { key: String, origin: String },
    #[error("invalid value for `{key}`: {value:?} ({reason})")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("{path}:{line}: {msg}")]
    Syntax {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{0}")]
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Default,
    Preset(String),
    File(PathBuf),
    Env,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => write!(f, "default"),
            Source::Preset(p) => write!(f, "preset:{p}"),
            Source::File(p) => write!(f, "file:{}", p.display()),
            Source::Env => write!(f, "env"),
            Source::Flag => write!(f, "flag"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Count {
        min: usize,
    },
    CountList,
    Seed,
    /// Real in `[lo, hi]`, with either end optionally open.
    Real {
        lo: f64,
        hi: f64,
        lo_open: bool,
        hi_open: bool,
    },
    RealList {
        lo: f64,
        hi: f64,
        open: bool,
    },
    Path,
}

const ANY: Kind = Kind::Real {
    lo: f64::NEG_INFINITY,
    hi: f64::INFINITY,
    lo_open: true,
    hi_open: true,
};
const UNIT_CLOSED: Kind = Kind::Real {
    lo: 0.0,
    hi: 1.0,
    lo_open: false,
    hi_open: false,
};
const UNIT_OPEN: Kind = Kind::Real {
    lo: 0.0,
    hi: 1.0,
    lo_open: true,
    hi_open: true,
};
const POSITIVE: Kind = Kind::Real {
    lo: 0.0,
    hi: f64::INFINITY,
    lo_open: true,
    hi_open: true,
};
const ABOVE_EIGHT: Kind = Kind::Real {
    lo: 8.0,
    hi: f64::INFINITY,
    lo_open: true,
    hi_open: true,
};

const KEYS: &[(&str, Kind, &str)] = &[
    ("n", Kind::Count { min: 1 }, "number of agents"),
    (
        "n_s",
        Kind::Count { min: 1 },
        "number of stubborn agents (first n_s rows of psi_file)",
    ),
    (
        "r_s",
        Kind::Real {
            lo: 0.0,
            hi: 1.0,
            lo_open: true,
            hi_open: false,
        },
        "share of stubborn agents",
    ),
    (
        "p_s",
        UNIT_CLOSED,
        "link probability inside the stubborn block",
    ),
    (
        "p_r",
        UNIT_CLOSED,
        "link probability inside the non-stubborn block",
    ),
    ("p_sr", UNIT_CLOSED, "link probability across the blocks"),
    ("theta", UNIT_OPEN, "stubbornness of stubborn agents"),
    (
        "psi_file",
        Kind::Path,
        "CSV link-probability matrix, no header",
    ),
    (
        "x0",
        Kind::RealList {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            open: true,
        },
        "initial opinions",
    ),
    ("seed", Kind::Seed, "base seed"),
    ("trials", Kind::Count { min: 1 }, "trials per configuration"),
    ("n_grid", Kind::CountList, "explicit network sizes"),
    ("grid_start", ANY, "first exponent k of n = round(e^k)"),
    ("grid_end", ANY, "last exponent k of n = round(e^k)"),
    ("grid_step", POSITIVE, "exponent step"),
    (
        "values",
        Kind::RealList {
            lo: 0.0,
            hi: 1.0,
            open: true,
        },
        "block probabilities swept per coordinate",
    ),
    (
        "thetas",
        Kind::RealList {
            lo: 0.0,
            hi: 1.0,
            open: true,
        },
        "stubbornness values swept",
    ),
    ("tol", POSITIVE, "iteration tolerance"),
    ("max_iters", Kind::Count { min: 1 }, "iteration cap"),
    ("threads", Kind::Count { min: 1 }, "worker threads"),
    ("c1", ABOVE_EIGHT, "cross-degree growth constant"),
    ("c2", ABOVE_EIGHT, "stubborn-degree growth constant"),
    (
        "tail_samples",
        Kind::Count { min: 1 },
        "graphs for the minimum-degree check",
    ),
    (
        "lambda_samples",
        Kind::Count { min: 1 },
        "graphs for the lambda_min check",
    ),
    (
        "chernoff_runs",
        Kind::Count { min: 1 },
        "runs for the Chernoff check",
    ),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1)
}

pub fn known_keys() -> impl Iterator<Item = (&'static str, &'static str)> {
    KEYS.iter().map(|k| (k.0, k.2))
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn parse_real(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| invalid(key, raw, "not a number"))?;
    if v.is_nan() {
        return Err(invalid(key, raw, "not a number"));
    }
    Ok(v)
}

fn check_range(
    key: &str,
    raw: &str,
    v: f64,
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
) -> Result<(), ConfigError> {
    let ok_lo = if lo_open { v > lo } else { v >= lo };
    let ok_hi = if hi_open { v < hi } else { v <= hi };
    if ok_lo && ok_hi && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            raw,
            format!(
                "out of range {}{lo}, {hi}{}",
                if lo_open { "(" } else { "[" },
                if hi_open { ")" } else { "]" }
            ),
        ))
    }
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn validate(key: &str, raw: &str, origin: &str) -> Result<(), ConfigError> {
    let kind = kind_of(key).ok_or_else(|| ConfigError::UnknownKey {
        key: key.to_string(),
        origin: origin.to_string(),
    })?;
    match kind {
        Kind::Count { min } => {
            let v: usize = raw
                .trim()
                .parse()
                .map_err(|_| invalid(key, raw, "not a nonnegative integer"))?;
            if v < min {
                return Err(invalid(key, raw, format!("must be at least {min}")));
            }
        }
        Kind::CountList => {
            let mut any = false;
            for item in split_list(raw) {
                let v: usize = item
                    .parse()
                    .map_err(|_| invalid(key, raw, format!("{item:?} is not an integer")))?;
                if v == 0 {
                    return Err(invalid(key, raw, "sizes must be positive"));
                }
                any = true;
            }
            if !any {
                return Err(invalid(key, raw, "empty list"));
            }
        }
        Kind::Seed => {
            raw.trim()
                .parse::<u64>()
                .map_err(|_| invalid(key, raw, "not an unsigned 64-bit integer"))?;
        }
        Kind::Real {
            lo,
            hi,
            lo_open,
            hi_open,
        } => {
            let v = parse_real(key, raw)?;
            check_range(key, raw, v, lo, hi, lo_open, hi_open)?;
        }
        Kind::RealList { lo, hi, open } => {
            let mut any = false;
            for item in split_list(raw) {
                let v = parse_real(key, item)?;
                check_range(key, raw, v, lo, hi, open, open)?;
                any = true;
            }
            if !any {
                return Err(invalid(key, raw, "empty list"));
            }
        }
        Kind::Path => {
            if raw.trim().is_empty() {
                return Err(invalid(key, raw, "empty path"));
            }
        }
    }
    Ok(())
}

/// One source of `key = value` pairs.
#[derive(Debug, Clone)]
pub struct Layer {
    pub source: Source,
    pub values: Vec<(String, String)>,
}

impl Layer {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            values: Vec::new(),
        }
    }

    pub fn set(mut self, key: &str, value: impl Into<String>) -> Self {
        self.values.push((key.to_string(), value.into()));
        self
    }
}

/// Parses a config file. `#` starts a comment; blank lines are skipped.
pub fn read_config_file(path: &Path) -> Result<Layer, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_config_text(&text, path)
}

pub fn parse_config_text(text: &str, path: &Path) -> Result<Layer, ConfigError> {
    let mut layer = Layer::new(Source::File(path.to_path_buf()));
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            path: path.display().to_string(),
            line: idx + 1,
            msg: format!("expected `key = value`, got {line:?}"),
        })?;
        let k = k.trim();
        if layer.values.iter().any(|(seen, _)| seen == k) {
            return Err(ConfigError::Syntax {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("duplicate key `{k}`"),
            });
        }
        layer.values.push((k.to_string(), v.trim().to_string()));
    }
    Ok(layer)
}

/// Parses a `KEY=VALUE` flag argument.
pub fn parse_assignment(arg: &str) -> Result<(String, String), String> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {arg:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub source: Source,
}

/// A value replaced by a later layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub previous: Entry,
    pub effective: Entry,
}

/// Validated, fully resolved configuration.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
    overrides: Vec<Override>,
}

impl RunConfig {
    /// Applies the layers in order; later layers win.
    pub fn resolve(layers: &[Layer]) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for layer in layers {
            for (k, v) in &layer.values {
                validate(k, v, &layer.source.to_string())?;
                let new = Entry {
                    value: v.clone(),
                    source: layer.source.clone(),
                };
                if let Some(prev) = cfg.entries.insert(k.clone(), new.clone()) {
                    cfg.overrides.push(Override {
                        key: k.clone(),
                        previous: prev,
                        effective: new,
                    });
                }
            }
        }
        Ok(cfg)
    }

    pub fn entries(&self) -> &BTreeMap<String, Entry> {
        &self.entries
    }

    pub fn overrides(&self) -> &[Override] {
        &self.overrides
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Sets a derived default if the key is absent.
    pub fn materialize(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !self.has(key) {
            let value = value.into();
            validate(key, &value, "default")?;
            self.entries.insert(
                key.to_string(),
                Entry {
                    value,
                    source: Source::Default,
                },
            );
        }
        Ok(())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key)
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        Ok(self.require(key)?.trim().parse().expect("validated"))
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.raw(key).map(|v| v.trim().parse().expect("validated"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        Ok(self.require(key)?.trim().parse().expect("validated"))
    }

    pub fn opt_usize(&self, key: &str) -> Option<usize> {
        self.raw(key).map(|v| v.trim().parse().expect("validated"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        Ok(self.require(key)?.trim().parse().expect("validated"))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        Ok(split_list(self.require(key)?)
            .map(|s| s.parse().expect("validated"))
            .collect())
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        Ok(split_list(self.require(key)?)
            .map(|s| s.parse().expect("validated"))
            .collect())
    }

    /// `key = value` lines that reproduce this configuration.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.entries {
            out.push_str(&format!("{k} = {}  # {}\n", e.value, e.source));
        }
        out
    }
}

/// Named parameter sets for the three sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "paper-fig1",
            Preset::Fig2 => "paper-fig2",
            Preset::Fig3 => "paper-fig3",
        }
    }

    /// Desk scale uses fewer trials and smaller sizes than paper scale.
    pub fn layer(self, paper_scale: bool) -> Layer {
        let l = Layer::new(Source::Preset(self.name().to_string()));
        match self {
            Preset::Fig1 => l
                .set("r_s", "0.1")
                .set("p_s", "0.3")
                .set("p_r", "0.3")
                .set("p_sr", "0.5")
                .set("theta", "0.5")
                .set("grid_start", "4")
                .set("grid_end", if paper_scale { "8" } else { "6.5" })
                .set("grid_step", if paper_scale { "0.05" } else { "0.25" })
                .set("trials", if paper_scale { "50" } else { "20" }),
            Preset::Fig2 => l
                .set("n", if paper_scale { "500" } else { "200" })
                .set("r_s", "0.5")
                .set("theta", "0.5")
                .set(
                    "values",
                    if paper_scale {
                        decimal_list(1, 9, 1, 10)
                    } else {
                        "0.2,0.5,0.8".into()
                    },
                )
                .set("trials", if paper_scale { "50" } else { "10" }),
            Preset::Fig3 => l
                .set("n", if paper_scale { "1000" } else { "300" })
                .set("r_s", "1")
                .set("p_s", "0.2")
                .set("p_r", "0.2")
                .set("p_sr", "0.2")
                .set(
                    "thetas",
                    if paper_scale {
                        decimal_list(5, 95, 1, 100)
                    } else {
                        decimal_list(5, 95, 10, 100)
                    },
                )
                .set("trials", if paper_scale { "50" } else { "10" }),
        }
    }
}

/// `a/d, (a+s)/d, …, b/d` written as plain decimals.
fn decimal_list(a: u32, b: u32, step: u32, denom: u32) -> String {
    (a..=b)
        .step_by(step as usize)
        .map(|k| (f64::from(k) / f64::from(denom)).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_layer(text: &str) -> Layer {
        parse_config_text(text, Path::new("run.conf")).unwrap()
    }

    #[test]
    fn flags_override_file_and_both_are_kept() {
        let file = file_layer("trials = 50\ntheta = 0.5 # comment\n\n");
        let flags = Layer::new(Source::Flag).set("trials", "5");
        let cfg = RunConfig::resolve(&[file, flags]).unwrap();
        assert_eq!(cfg.usize("trials").unwrap(), 5);
        let o = &cfg.overrides()[0];
        assert_eq!(
            (o.previous.value.as_str(), o.effective.value.as_str()),
            ("50", "5")
        );
        assert_eq!(o.effective.source, Source::Flag);
    }

    #[test]
    fn out_of_range_names_the_key() {
        let err = RunConfig::resolve(&[file_layer("theta = 1.2")]).unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "theta"));
        assert!(err.to_string().contains("theta"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = RunConfig::resolve(&[file_layer("thetta = 0.5")]).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key, .. } if key == "thetta"));
        let cfg = RunConfig::resolve(&[]).unwrap();
        assert_eq!(
            cfg.f64("theta").unwrap_err(),
            ConfigError::Missing("theta".into())
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config_text("n = 3\nbogus line\n", Path::new("x.conf")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
        let err = parse_config_text("n = 3\nn = 4\n", Path::new("x.conf")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn lists_parse() {
        let cfg =
            RunConfig::resolve(&[file_layer("values = 0.2, 0.5,0.8\nn_grid = 10,20")]).unwrap();
        assert_eq!(cfg.f64_list("values").unwrap(), vec![0.2, 0.5, 0.8]);
        assert_eq!(cfg.usize_list("n_grid").unwrap(), vec![10, 20]);
        assert!(RunConfig::resolve(&[file_layer("values = 0.2, 1.0")]).is_err());
    }

    #[test]
    fn materialized_defaults_are_marked() {
        let mut cfg = RunConfig::resolve(&[]).unwrap();
        cfg.materialize("tol", "1e-9").unwrap();
        assert_eq!(cfg.entries()["tol"].source, Source::Default);
        assert!(cfg.to_config_text().contains("tol = 1e-9  # default"));
    }

    #[test]
    fn presets_are_valid() {
        for p in [Preset::Fig1, Preset::Fig2, Preset::Fig3] {
            for paper in [false, true] {
                RunConfig::resolve(&[p.layer(paper)]).unwrap();
            }
        }
        let cfg = RunConfig::resolve(&[Preset::Fig3.layer(false)]).unwrap();
        let t = cfg.f64_list("thetas").unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!((t[0], t[9]), (0.05, 0.95));
        let cfg = RunConfig::resolve(&[Preset::Fig3.layer(true)]).unwrap();
        assert_eq!(cfg.f64_list("thetas").unwrap().len(), 91);
    }
}
