use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;
use thiserror::Error;

use crate::assembly::OperatorForm;
use crate::scenario::registry::validate_name;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: expected key=value")]
    MissingSeparator { line: usize },
    #[error("line {line}: malformed value `{value}` for `{key}`")]
    Malformed { line: usize, key: String, value: String },
    #[error("line {line}: invalid `{key}`: {reason}")]
    Invalid { line: usize, key: String, reason: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Spectrum,
    Converge,
    GreenCheck,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Spectrum => "spectrum",
            Command::Converge => "converge",
            Command::GreenCheck => "greencheck",
        })
    }
}

impl FromStr for Command {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "solve" => Ok(Command::Solve),
            "spectrum" => Ok(Command::Spectrum),
            "converge" => Ok(Command::Converge),
            "greencheck" => Ok(Command::GreenCheck),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientSpec {
    Power { alpha: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradingSpec {
    Uniform,
    Geometric { ratio: f64, layers: usize },
}

impl fmt::Display for GradingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradingSpec::Uniform => f.write_str("uniform"),
            GradingSpec::Geometric { ratio, layers } => write!(f, "geometric:{ratio}:{layers}"),
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub command: Command,
    pub form: OperatorForm,
    pub coefficient: CoefficientSpec,
    pub x0: f64,
    pub n_elements: usize,
    pub grading: GradingSpec,
    pub dt: f64,
    pub theta: f64,
    pub horizon: f64,
    pub rule_order: usize,
    pub source: String,
    pub initial: String,
    pub eigen_count: usize,
    pub levels: Vec<usize>,
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Defaults for everything but the command and coefficient.
    pub fn new(command: Command, coefficient: CoefficientSpec) -> Self {
        Self {
            command,
            form: OperatorForm::Divergence,
            coefficient,
            x0: 0.5,
            n_elements: 64,
            grading: GradingSpec::Uniform,
            dt: 1e-4,
            theta: 1.0,
            horizon: 0.01,
            rule_order: 4,
            source: "zero".into(),
            initial: "power4".into(),
            eigen_count: 10,
            levels: vec![8, 16, 32, 64],
            output_dir: None,
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "form",
    "coefficient",
    "alpha",
    "x0",
    "n_elements",
    "grading",
    "dt",
    "theta",
    "T",
    "rule_order",
    "source",
    "initial",
    "eigen_count",
    "levels",
    "output_dir",
];

struct Entry {
    line: usize,
    value: String,
}

fn number<F: FromStr>(key: &str, e: &Entry) -> Result<F, ConfigError> {
    e.value.parse().map_err(|_| ConfigError::Malformed {
        line: e.line,
        key: key.into(),
        value: e.value.clone(),
    })
}

fn invalid(key: &str, e: &Entry, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        line: e.line,
        key: key.into(),
        reason: reason.into(),
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped;
/// a repeated key keeps its last value.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or(ConfigError::MissingSeparator { line })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { key: k.into(), line });
        }
        if let Some(prev) = map.get(k) {
            warn!("key `{k}` on line {line} overrides line {}", prev.line);
        }
        map.insert(k.into(), Entry { line, value: v.into() });
    }

    let mut entries: Vec<(&String, &Entry)> = map.iter().collect();
    entries.sort_by_key(|(_, e)| e.line);

    let mut command = None;
    let mut kind = "power".to_string();
    let mut alpha = None;
    let mut constant = 1.0;
    let mut cfg = ScenarioConfig::new(Command::Solve, CoefficientSpec::Constant { value: 1.0 });
    for (key, e) in entries {
        let key = key.as_str();
        match key {
            "command" => {
                command = Some(
                    e.value
                        .parse::<Command>()
                        .map_err(|_| invalid(key, e, "expected solve, spectrum, converge or greencheck"))?,
                )
            }
            "form" => {
                cfg.form = match e.value.as_str() {
                    "divergence" => OperatorForm::Divergence,
                    "nondivergence" => OperatorForm::NonDivergence,
                    _ => return Err(invalid(key, e, "expected divergence or nondivergence")),
                }
            }
            "coefficient" => {
                let v = e.value.as_str();
                if v == "power" || v == "constant" {
                    kind = v.into();
                } else if let Some(c) = v.strip_prefix("constant:") {
                    kind = "constant".into();
                    constant = c.parse().map_err(|_| ConfigError::Malformed {
                        line: e.line,
                        key: key.into(),
                        value: e.value.clone(),
                    })?;
                    if !(constant > 0.0) || !f64::is_finite(constant) {
                        return Err(invalid(key, e, "constant coefficient must be positive"));
                    }
                } else {
                    return Err(invalid(key, e, "expected power, constant or constant:<c>"));
                }
            }
            "alpha" => {
                let a: f64 = number(key, e)?;
                if !(a > 0.0) || !a.is_finite() {
                    return Err(invalid(key, e, format!("invalid exponent {a}: need alpha > 0")));
                }
                alpha = Some(a);
            }
            "x0" => {
                cfg.x0 = number(key, e)?;
                if !(0.0..=1.0).contains(&cfg.x0) {
                    return Err(invalid(key, e, "x0 must lie in [0, 1]"));
                }
            }
            "n_elements" => {
                cfg.n_elements = number(key, e)?;
                if cfg.n_elements < 2 {
                    return Err(invalid(key, e, "need at least 2 elements"));
                }
            }
            "grading" => {
                cfg.grading = if e.value == "uniform" {
                    GradingSpec::Uniform
                } else {
                    let parts: Vec<&str> = e.value.split(':').collect();
                    match parts.as_slice() {
                        ["geometric", r, l] => {
                            let ratio: f64 = r.parse().map_err(|_| invalid(key, e, "bad ratio"))?;
                            let layers: usize = l.parse().map_err(|_| invalid(key, e, "bad layer count"))?;
                            if !(ratio > 0.0 && ratio < 1.0) || layers == 0 {
                                return Err(invalid(key, e, "need 0 < ratio < 1 and layers >= 1"));
                            }
                            GradingSpec::Geometric { ratio, layers }
                        }
                        _ => return Err(invalid(key, e, "expected uniform or geometric:<ratio>:<layers>")),
                    }
                }
            }
            "dt" => {
                cfg.dt = number(key, e)?;
                if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
                    return Err(invalid(key, e, "dt must be positive"));
                }
            }
            "theta" => {
                cfg.theta = number(key, e)?;
                if !(0.0..=1.0).contains(&cfg.theta) {
                    return Err(invalid(key, e, "theta must lie in [0, 1]"));
                }
            }
            "T" => {
                cfg.horizon = number(key, e)?;
                if !(cfg.horizon >= 0.0) || !cfg.horizon.is_finite() {
                    return Err(invalid(key, e, "T must be non-negative"));
                }
            }
            "rule_order" => {
                cfg.rule_order = number(key, e)?;
                if !(1..=32).contains(&cfg.rule_order) {
                    return Err(invalid(key, e, "rule_order must lie in 1..=32"));
                }
            }
            "source" | "initial" => {
                validate_name(&e.value).map_err(|r| invalid(key, e, r))?;
                if key == "source" {
                    cfg.source = e.value.clone();
                } else {
                    cfg.initial = e.value.clone();
                }
            }
            "eigen_count" => {
                cfg.eigen_count = number(key, e)?;
                if cfg.eigen_count == 0 {
                    return Err(invalid(key, e, "eigen_count must be positive"));
                }
            }
            "levels" => {
                let levels = e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ConfigError::Malformed {
                        line: e.line,
                        key: key.into(),
                        value: e.value.clone(),
                    })?;
                if levels.len() < 2 || levels[0] < 2 || levels.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid(key, e, "need at least two increasing levels >= 2"));
                }
                cfg.levels = levels;
            }
            "output_dir" => cfg.output_dir = Some(PathBuf::from(&e.value)),
            _ => unreachable!("key list checked above"),
        }
    }

    cfg.command = command.ok_or_else(|| ConfigError::MissingKey("command".into()))?;
    cfg.coefficient = if kind == "constant" || (alpha.is_none() && cfg.command == Command::GreenCheck) {
        if alpha.is_some() {
            warn!("alpha ignored for a constant coefficient");
        }
        CoefficientSpec::Constant { value: constant }
    } else {
        CoefficientSpec::Power {
            alpha: alpha.ok_or_else(|| ConfigError::MissingKey("alpha".into()))?,
        }
    };
    Ok(cfg)
}

/// Canonical text form; `parse_config(&render(c)) == Ok(c)`.
pub fn render(cfg: &ScenarioConfig) -> String {
    let mut lines = vec![format!("command={}", cfg.command), format!("form={}", cfg.form)];
    match cfg.coefficient {
        CoefficientSpec::Power { alpha } => {
            lines.push("coefficient=power".into());
            lines.push(format!("alpha={alpha}"));
        }
        CoefficientSpec::Constant { value } => lines.push(format!("coefficient=constant:{value}")),
    }
    lines.push(format!("x0={}", cfg.x0));
    lines.push(format!("n_elements={}", cfg.n_elements));
    lines.push(format!("grading={}", cfg.grading));
    lines.push(format!("dt={}", cfg.dt));
    lines.push(format!("theta={}", cfg.theta));
    lines.push(format!("T={}", cfg.horizon));
    lines.push(format!("rule_order={}", cfg.rule_order));
    lines.push(format!("source={}", cfg.source));
    lines.push(format!("initial={}", cfg.initial));
    lines.push(format!("eigen_count={}", cfg.eigen_count));
    let levels: Vec<String> = cfg.levels.iter().map(|l| l.to_string()).collect();
    lines.push(format!("levels={}", levels.join(",")));
    if let Some(dir) = &cfg.output_dir {
        lines.push(format!("output_dir={}", dir.display()));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
