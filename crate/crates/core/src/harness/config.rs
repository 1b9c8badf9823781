//! Experiment configuration files.
//!
//! ```text
//! # comment
//! [problem]
//! set = box            # box | l2ball | simplex
//! dimension = 10
//! lo = -1              # scalar or comma list
//! hi = 1
//!
//! [losses]
//! kind = linear        # linear | quadratic
//! G = 1.0
//!
//! [delays]
//! kind = uniform       # fixed | uniform | bursty
//! d_max = 50
//!
//! [run]
//! algorithm = dofw_convex
//! T = 1000
//! eta = general        # general | strongly_convex_set | <number>
//! ```
//!
//! Unknown sections and keys are rejected.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::delay::DelayVariant;
use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Hyperbox, L2Ball, Simplex};
use crate::harness::seed::derive_seed;
use crate::losses::{LinearStream, LossStream, QuadraticStream};
use crate::solvers::AlgorithmRegistry;
use crate::vector::Vector;

pub const DEFAULT_DIMENSION: usize = 10;

const SECTIONS: &[(&str, &[&str])] = &[
    ("problem", &["set", "dimension", "radius", "center", "lo", "hi", "scale"]),
    ("losses", &["kind", "G", "beta", "seed"]),
    ("delays", &["kind", "d", "d_max", "period", "burst", "seed"]),
    (
        "run",
        &["algorithm", "T", "eta", "beta", "ogd_step", "y1", "base_seed", "output"],
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    L2Ball { center: Vec<f64>, radius: f64 },
    Simplex { dimension: usize, scale: f64 },
}

impl SetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SetSpec::Box { .. } => "box",
            SetSpec::L2Ball { .. } => "l2ball",
            SetSpec::Simplex { .. } => "simplex",
        }
    }

    pub fn build(&self) -> Result<Arc<dyn FeasibleSet>> {
        Ok(match self {
            SetSpec::Box { lo, hi } => Arc::new(Hyperbox::new(lo.clone().into(), hi.clone().into())?),
            SetSpec::L2Ball { center, radius } => Arc::new(L2Ball::new(center.clone().into(), *radius)?),
            SetSpec::Simplex { dimension, scale } => Arc::new(Simplex::new(*dimension, *scale)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamKind {
    Linear { grad_bound: f64 },
    Quadratic { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSpec {
    pub kind: StreamKind,
    /// Explicit seed; derived from the base seed when absent.
    pub seed: Option<u64>,
}

impl StreamSpec {
    pub fn strong_convexity(&self) -> f64 {
        match self.kind {
            StreamKind::Linear { .. } => 0.0,
            StreamKind::Quadratic { beta } => beta,
        }
    }

    pub fn build(&self, set: &dyn FeasibleSet, horizon: usize, base_seed: u64) -> Result<Box<dyn LossStream>> {
        let seed = self.seed.unwrap_or_else(|| derive_seed(base_seed, "losses"));
        Ok(match self.kind {
            StreamKind::Linear { grad_bound } => {
                Box::new(LinearStream::random(set.dimension(), horizon, grad_bound, seed)?)
            }
            StreamKind::Quadratic { beta } => Box::new(QuadraticStream::random(set, horizon, beta, seed)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelaySpec {
    Fixed { d: usize },
    Uniform { d_max: usize, seed: Option<u64> },
    Bursty { period: usize, burst: usize },
}

impl DelaySpec {
    pub fn variant(&self, base_seed: u64) -> DelayVariant {
        match *self {
            DelaySpec::Fixed { d } => DelayVariant::Fixed(d),
            DelaySpec::Uniform { d_max, seed } => DelayVariant::UniformRandom {
                d_max,
                seed: seed.unwrap_or_else(|| derive_seed(base_seed, "delays")),
            },
            DelaySpec::Bursty { period, burst } => DelayVariant::Bursty { period, burst },
        }
    }

    /// Same variant with its delay magnitude replaced by `d`.
    pub fn with_magnitude(&self, d: usize) -> DelaySpec {
        match *self {
            DelaySpec::Fixed { .. } => DelaySpec::Fixed { d },
            DelaySpec::Uniform { seed, .. } => DelaySpec::Uniform { d_max: d, seed },
            DelaySpec::Bursty { period, .. } => DelaySpec::Bursty { period, burst: d },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    General,
    StronglyConvexSet,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub set: SetSpec,
    pub stream: StreamSpec,
    pub delays: DelaySpec,
    pub algorithm: String,
    pub horizon: usize,
    pub eta_rule: EtaRule,
    /// β handed to strongly convex learners; defaults to the stream's modulus.
    pub beta: Option<f64>,
    pub ogd_step: Option<f64>,
    pub y1: Option<Vec<f64>>,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    /// Non-fatal notes produced during validation.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(set: SetSpec, stream: StreamKind, algorithm: &str, horizon: usize) -> Self {
        ExperimentConfig {
            set,
            stream: StreamSpec { kind: stream, seed: None },
            delays: DelaySpec::Fixed { d: 1 },
            algorithm: algorithm.to_string(),
            horizon,
            eta_rule: EtaRule::General,
            beta: None,
            ogd_step: None,
            y1: None,
            base_seed: 0,
            output: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_delays(mut self, delays: DelaySpec) -> Self {
        self.delays = delays;
        self
    }

    pub fn with_eta(mut self, eta_rule: EtaRule) -> Self {
        self.eta_rule = eta_rule;
        self
    }

    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }

    /// Checks cross-field compatibility. `line` is reported on failure.
    pub fn validate(&mut self, registry: &AlgorithmRegistry, line: usize) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config(line, "T must be >= 1"));
        }
        let entry = registry.get(&self.algorithm).ok_or_else(|| {
            Error::config(
                line,
                format!(
                    "unknown algorithm `{}` (known: {})",
                    self.algorithm,
                    registry.names().collect::<Vec<_>>().join(", ")
                ),
            )
        })?;
        let stream_beta = self.stream.strong_convexity();
        if entry.requirements.strongly_convex_losses {
            if stream_beta <= 0.0 {
                return Err(Error::config(
                    line,
                    format!("{} requires a strongly convex loss stream (beta > 0)", self.algorithm),
                ));
            }
            if let Some(beta) = self.beta {
                if !(beta > 0.0 && beta <= stream_beta) {
                    return Err(Error::config(
                        line,
                        format!("run.beta = {beta} must lie in (0, {stream_beta}], the stream's modulus"),
                    ));
                }
            }
        }
        if entry.requirements.undelayed_feedback && self.delays != (DelaySpec::Fixed { d: 1 }) {
            return Err(Error::config(
                line,
                format!("{} needs undelayed feedback (delays kind = fixed, d = 1)", self.algorithm),
            ));
        }
        if let EtaRule::Explicit(eta) = self.eta_rule {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::config(line, format!("eta must be positive, got {eta}")));
            }
        }
        let set = self.set.build().map_err(|e| Error::config(line, e.to_string()))?;
        if self.eta_rule == EtaRule::StronglyConvexSet && set.strong_convexity() == 0.0 {
            self.warnings.push(format!(
                "eta = strongly_convex_set on `{}`, which is not a strongly convex set",
                self.set.kind()
            ));
        }
        if let Some(y1) = &self.y1 {
            let y1 = Vector::new(y1.clone());
            if y1.len() != set.dimension() || !set.contains(&y1, crate::geometry::MEMBERSHIP_TOL) {
                return Err(Error::config(line, "y1 is not a feasible point of the set"));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
struct RawConfig {
    entries: HashMap<(String, String), Entry>,
    section_lines: HashMap<String, usize>,
    last_line: usize,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<&'static (&'static str, &'static [&'static str])> = None;
        for (idx, full) in text.lines().enumerate() {
            let line = idx + 1;
            raw.last_line = line;
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(line, format!("malformed section header `{content}`")))?
                    .trim();
                let found = SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| Error::config(line, format!("unknown section [{name}]")))?;
                if raw.section_lines.insert(name.to_string(), line).is_some() {
                    return Err(Error::config(line, format!("duplicate section [{name}]")));
                }
                section = Some(found);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let (sec_name, keys) =
                section.ok_or_else(|| Error::config(line, format!("key `{key}` outside of any section")))?;
            if !keys.contains(&key) {
                return Err(Error::config(
                    line,
                    format!("unknown key `{key}` in section [{sec_name}]"),
                ));
            }
            if value.is_empty() {
                return Err(Error::config(line, format!("empty value for `{key}`")));
            }
            let slot = (sec_name.to_string(), key.to_string());
            if raw.entries.contains_key(&slot) {
                return Err(Error::config(line, format!("duplicate key `{key}` in [{sec_name}]")));
            }
            raw.entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(raw)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn missing_line(&self, section: &str) -> usize {
        self.section_lines.get(section).copied().unwrap_or(self.last_line)
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry> {
        self.get(section, key).ok_or_else(|| {
            Error::config(
                self.missing_line(section),
                format!("missing required key `{key}` in [{section}]"),
            )
        })
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<T>> {
        self.get(section, key)
            .map(|e| {
                e.value.parse::<T>().map_err(|_| {
                    Error::config(e.line, format!("`{key}` must be {what}, got `{}`", e.value))
                })
            })
            .transpose()
    }

    fn real(&self, section: &str, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(section, key, "a real number")?;
        if let (Some(x), Some(e)) = (v, self.get(section, key)) {
            if !x.is_finite() {
                return Err(Error::config(e.line, format!("`{key}` must be finite")));
            }
        }
        Ok(v)
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<usize>> {
        self.parsed(section, key, "a non-negative integer")
    }

    fn seed(&self, section: &str, key: &str) -> Result<Option<u64>> {
        self.parsed(section, key, "an unsigned integer")
    }

    /// Comma list of reals, or a scalar broadcast to `dim`.
    fn list(&self, section: &str, key: &str, dim: Option<usize>) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        let items: std::result::Result<Vec<f64>, _> =
            e.value.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let items = items.map_err(|_| {
            Error::config(e.line, format!("`{key}` must be a real or comma list of reals"))
        })?;
        if items.iter().any(|x| !x.is_finite()) {
            return Err(Error::config(e.line, format!("`{key}` entries must be finite")));
        }
        match (items.len(), dim) {
            (1, Some(n)) => Ok(Some(vec![items[0]; n])),
            (len, Some(n)) if len != n => Err(Error::config(
                e.line,
                format!("`{key}` has {len} entries, dimension is {n}"),
            )),
            _ => Ok(Some(items)),
        }
    }
}

fn list_len(raw: &RawConfig, key: &str) -> Option<usize> {
    raw.get("problem", key)
        .map(|e| e.value.split(',').count())
        .filter(|&n| n > 1)
}

fn parse_set(raw: &RawConfig) -> Result<SetSpec> {
    let kind = raw.require("problem", "set")?;
    let explicit_dim = raw.count("problem", "dimension")?;
    if explicit_dim == Some(0) {
        let line = raw.get("problem", "dimension").map_or(0, |e| e.line);
        return Err(Error::config(line, "dimension must be >= 1"));
    }
    let inferred = ["center", "lo", "hi"].iter().find_map(|k| list_len(raw, k));
    let dim = explicit_dim.or(inferred).unwrap_or(DEFAULT_DIMENSION);
    let positive = |key: &str, default: f64| -> Result<f64> {
        let v = raw.real("problem", key)?.unwrap_or(default);
        if v <= 0.0 {
            let line = raw.get("problem", key).map_or(kind.line, |e| e.line);
            return Err(Error::config(line, format!("`{key}` must be > 0")));
        }
        Ok(v)
    };
    let spec = match kind.value.as_str() {
        "box" => {
            let lo = raw.list("problem", "lo", Some(dim))?.unwrap_or_else(|| vec![-1.0; dim]);
            let hi = raw.list("problem", "hi", Some(dim))?.unwrap_or_else(|| vec![1.0; dim]);
            if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
                let line = raw.get("problem", "hi").map_or(kind.line, |e| e.line);
                return Err(Error::config(line, "box requires lo < hi in every coordinate"));
            }
            SetSpec::Box { lo, hi }
        }
        "l2ball" => SetSpec::L2Ball {
            center: raw.list("problem", "center", Some(dim))?.unwrap_or_else(|| vec![0.0; dim]),
            radius: positive("radius", 1.0)?,
        },
        "simplex" => SetSpec::Simplex {
            dimension: dim,
            scale: positive("scale", 1.0)?,
        },
        other => {
            return Err(Error::config(
                kind.line,
                format!("unknown set `{other}` (expected box, l2ball or simplex)"),
            ))
        }
    };
    Ok(spec)
}

fn parse_stream(raw: &RawConfig) -> Result<StreamSpec> {
    let kind = raw.require("losses", "kind")?;
    let seed = raw.seed("losses", "seed")?;
    let stream = match kind.value.as_str() {
        "linear" => {
            let g = raw.real("losses", "G")?.unwrap_or(1.0);
            if g <= 0.0 {
                return Err(Error::config(raw.get("losses", "G").unwrap().line, "G must be > 0"));
            }
            if let Some(e) = raw.get("losses", "beta") {
                let beta: f64 = raw.real("losses", "beta")?.unwrap_or(0.0);
                if beta != 0.0 {
                    return Err(Error::config(e.line, "linear losses have beta = 0"));
                }
            }
            StreamKind::Linear { grad_bound: g }
        }
        "quadratic" => {
            if let Some(e) = raw.get("losses", "G") {
                return Err(Error::config(
                    e.line,
                    "quadratic losses derive G = beta * diameter; do not set G",
                ));
            }
            let beta = raw.real("losses", "beta")?.unwrap_or(1.0);
            if beta <= 0.0 {
                let line = raw.get("losses", "beta").map_or(kind.line, |e| e.line);
                return Err(Error::config(line, "quadratic losses need beta > 0"));
            }
            StreamKind::Quadratic { beta }
        }
        other => {
            return Err(Error::config(
                kind.line,
                format!("unknown loss kind `{other}` (expected linear or quadratic)"),
            ))
        }
    };
    Ok(StreamSpec { kind: stream, seed })
}

fn parse_delays(raw: &RawConfig) -> Result<DelaySpec> {
    let kind = raw.get("delays", "kind").map(|e| (e.value.as_str(), e.line));
    let at_least_one = |key: &str, default: usize| -> Result<usize> {
        let v = raw.count("delays", key)?.unwrap_or(default);
        if v == 0 {
            let line = raw.get("delays", key).map_or(0, |e| e.line);
            return Err(Error::config(line, format!("`{key}` must be >= 1")));
        }
        Ok(v)
    };
    let spec = match kind {
        None | Some(("fixed", _)) => DelaySpec::Fixed {
            d: at_least_one("d", 1)?,
        },
        Some(("uniform", line)) => DelaySpec::Uniform {
            d_max: raw
                .count("delays", "d_max")?
                .filter(|&d| d >= 1)
                .ok_or_else(|| Error::config(line, "uniform delays need d_max >= 1"))?,
            seed: raw.seed("delays", "seed")?,
        },
        Some(("bursty", _)) => DelaySpec::Bursty {
            period: at_least_one("period", 10)?,
            burst: at_least_one("burst", 10)?,
        },
        Some((other, line)) => {
            return Err(Error::config(
                line,
                format!("unknown delay kind `{other}` (expected fixed, uniform or bursty)"),
            ))
        }
    };
    Ok(spec)
}

/// Parses and validates against the builtin algorithm registry.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &AlgorithmRegistry::builtin())
}

pub fn parse_config_with(text: &str, registry: &AlgorithmRegistry) -> Result<ExperimentConfig> {
    let raw = RawConfig::parse(text)?;
    let set = parse_set(&raw)?;
    let stream = parse_stream(&raw)?;
    let delays = parse_delays(&raw)?;

    let algorithm = raw.require("run", "algorithm")?;
    let horizon = raw
        .count("run", "T")?
        .ok_or_else(|| Error::config(raw.missing_line("run"), "missing required key `T` in [run]"))?;
    let eta_rule = match raw.get("run", "eta") {
        None => EtaRule::General,
        Some(e) => match e.value.as_str() {
            "general" => EtaRule::General,
            "strongly_convex_set" => EtaRule::StronglyConvexSet,
            other => EtaRule::Explicit(other.parse::<f64>().map_err(|_| {
                Error::config(
                    e.line,
                    format!("eta must be general, strongly_convex_set or a number, got `{other}`"),
                )
            })?),
        },
    };
    let dim = match &set {
        SetSpec::Box { lo, .. } => lo.len(),
        SetSpec::L2Ball { center, .. } => center.len(),
        SetSpec::Simplex { dimension, .. } => *dimension,
    };
    let ogd_step = raw.real("run", "ogd_step")?;
    if let (Some(s), Some(e)) = (ogd_step, raw.get("run", "ogd_step")) {
        if s <= 0.0 {
            return Err(Error::config(e.line, "ogd_step must be > 0"));
        }
    }

    let mut config = ExperimentConfig {
        set,
        stream,
        delays,
        algorithm: algorithm.value.clone(),
        horizon,
        eta_rule,
        beta: raw.real("run", "beta")?,
        ogd_step,
        y1: raw.list("run", "y1", Some(dim))?,
        base_seed: raw.seed("run", "base_seed")?.unwrap_or(0),
        output: raw.get("run", "output").map(|e| PathBuf::from(&e.value)),
        warnings: Vec::new(),
    };
    config.validate(registry, algorithm.line)?;
    Ok(config)
}
