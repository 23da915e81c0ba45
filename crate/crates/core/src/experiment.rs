//! Declarative experiments.
//!
//! An experiment is a TOML document naming a `kind` plus the parameters that
//! kind needs. Parsing is strict: unknown keys, missing required fields and
//! out-of-range values are all collected and reported together.
//!
//! ```toml
//! kind = "simulate"
//! seed = 42
//! replications = 100
//! n = 64
//! T = 1.0
//! output = "out/simulate"
//!
//! [model]
//! name = "gbm"
//! mu = 0.05
//! sigma = 0.2
//!
//! [noise]
//! wiener = 1
//! rate = 0.5
//! ```
//!
//! Artifacts are a `report.json` plus CSV files in the output directory. The
//! only field that differs between two runs of the same configuration is
//! `metadata.generated_at_unix`.

use std::fmt;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};
use toml::Table;

use crate::error::{Result, SdeError};
use crate::gronwall::{
    counterexample_stats, gbm_square_ensemble, lenglart_moment, lenglart_tail, verify_gronwall, DominatedPair, Variant,
    Verdict,
};
use crate::hypothesis::{check_condition, Condition, RandomPathSampler};
use crate::models;
use crate::noise::{Intensity, MarkDistribution, MartingaleMeasureSpec};
use crate::solver::{euler_solve_sampled, replicate, resolution_gap, strong_error_study, CoefficientModel};
use crate::stats::{Estimate, Z_TWO_SIDED_99};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Convergence,
    VerifyGronwall,
    Lenglart,
    Counterexample,
    CheckConditions,
}

impl Kind {
    const ALL: [Kind; 6] = [
        Kind::Simulate,
        Kind::Convergence,
        Kind::VerifyGronwall,
        Kind::Lenglart,
        Kind::Counterexample,
        Kind::CheckConditions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Convergence => "convergence",
            Kind::VerifyGronwall => "verify-gronwall",
            Kind::Lenglart => "lenglart",
            Kind::Counterexample => "counterexample",
            Kind::CheckConditions => "check-conditions",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::Simulate => &["model", "noise", "n", "T", "horizon", "replications", "save_paths"],
            Kind::Convergence => &[
                "model",
                "noise",
                "resolutions",
                "T",
                "horizon",
                "replications",
                "epsilon",
            ],
            Kind::VerifyGronwall => &["model", "n", "T", "horizon", "replications", "p", "variant"],
            Kind::Lenglart => &["pair", "replications", "p", "c", "d"],
            Kind::Counterexample => &["q", "alpha", "p", "replications"],
            Kind::CheckConditions => &[
                "model",
                "noise",
                "conditions",
                "R",
                "samples",
                "T",
                "horizon",
                "max_breakpoints",
            ],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = SdeError;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SdeError::Argument(format!("unknown kind `{s}`")))
    }
}

const COMMON_KEYS: &[&str] = &["kind", "seed", "output", "threads"];

/// A built-in coefficient model with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Gbm { mu: f64, sigma: f64, x0: f64 },
    JumpGbm { mu: f64, sigma: f64, jump: f64, x0: f64 },
    DelayOde,
    Linear { sigma: f64, x0: f64 },
    Superlinear { x0: f64 },
    Zero { delay: f64, value: Vec<f64> },
}

impl ModelConfig {
    pub fn build(&self, noise: &NoiseConfig) -> Result<CoefficientModel> {
        match self {
            ModelConfig::Gbm { mu, sigma, x0 } => models::gbm(*mu, *sigma, *x0),
            ModelConfig::JumpGbm { mu, sigma, jump, x0 } => models::jump_gbm(*mu, *sigma, *jump, *x0),
            ModelConfig::DelayOde => models::delay_ode(),
            ModelConfig::Linear { sigma, x0 } => models::linear(*sigma, noise.wiener as f64 + noise.rate_bound(), *x0),
            ModelConfig::Superlinear { x0 } => models::superlinear(*x0),
            ModelConfig::Zero { delay, value } => models::zero(*delay, value),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ModelConfig::Gbm { .. } => "gbm",
            ModelConfig::JumpGbm { .. } => "jump-gbm",
            ModelConfig::DelayOde => "delay-ode",
            ModelConfig::Linear { .. } => "linear",
            ModelConfig::Superlinear { .. } => "superlinear",
            ModelConfig::Zero { .. } => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarksConfig {
    Unmarked,
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    Categorical { weights: Vec<f64> },
}

/// Wiener components plus a Poisson part with `λ(t) = rate + rate_slope t`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub wiener: usize,
    pub rate: f64,
    pub rate_slope: f64,
    pub rate_bound: Option<f64>,
    pub marks: MarksConfig,
    pub horizon: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            wiener: 1,
            rate: 0.0,
            rate_slope: 0.0,
            rate_bound: None,
            marks: MarksConfig::Unmarked,
            horizon: 1.0,
        }
    }
}

impl NoiseConfig {
    fn rate_bound(&self) -> f64 {
        self.rate_bound
            .unwrap_or_else(|| self.rate.max(self.rate + self.rate_slope * self.horizon).max(0.0))
    }

    pub fn build(&self) -> MartingaleMeasureSpec {
        let intensity = if self.rate_slope == 0.0 {
            Intensity::Constant(self.rate)
        } else {
            Intensity::Linear {
                intercept: self.rate,
                slope: self.rate_slope,
            }
        };
        let marks = match &self.marks {
            MarksConfig::Unmarked => MarkDistribution::Unmarked,
            MarksConfig::Uniform { lo, hi } => MarkDistribution::UniformBox {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            MarksConfig::Categorical { weights } => MarkDistribution::Categorical {
                weights: weights.clone(),
            },
        };
        MartingaleMeasureSpec::wiener(self.wiener)
            .with_intensity(intensity, self.rate_bound())
            .with_marks(marks)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Simulate {
        model: ModelConfig,
        noise: NoiseConfig,
        n: u32,
        horizon: f64,
        save_paths: usize,
    },
    Convergence {
        model: ModelConfig,
        noise: NoiseConfig,
        resolutions: Vec<u32>,
        horizon: f64,
        epsilon: Option<f64>,
    },
    VerifyGronwall {
        mu: f64,
        sigma: f64,
        x0: f64,
        n: u32,
        horizon: f64,
        p: Vec<f64>,
        variant: Variant,
    },
    Lenglart {
        pair: DominatedPair,
        p: Vec<f64>,
        c: f64,
        d: f64,
    },
    Counterexample {
        q: Vec<f64>,
        alpha: f64,
        p: f64,
    },
    CheckConditions {
        model: ModelConfig,
        noise: NoiseConfig,
        conditions: Vec<Condition>,
        radius: f64,
        samples: usize,
        horizon: f64,
        max_breakpoints: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub replications: usize,
    pub output: PathBuf,
    pub threads: Option<usize>,
    pub task: Task,
    /// The parsed document, echoed into the report.
    pub raw: Table,
}

fn greek(key: &str) -> Option<&'static str> {
    match key {
        "alpha" => Some("α"),
        "epsilon" => Some("ε"),
        "mu" => Some("μ"),
        "sigma" => Some("σ"),
        _ => None,
    }
}

fn unknown_key(key: &str, scope: &str, allowed: &[&str]) -> String {
    let best = allowed
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(s, _)| *s >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let place = if scope.is_empty() {
        String::new()
    } else {
        format!(" in [{scope}]")
    };
    match best {
        Some((_, k)) => {
            let symbol = greek(k).map(|g| format!(" ({g})")).unwrap_or_default();
            format!("unknown key `{key}`{place}; did you mean `{k}`{symbol}?")
        }
        None => format!("unknown key `{key}`{place}"),
    }
}

/// Typed accessors over one TOML table that push errors instead of failing.
struct Fields<'a> {
    table: &'a Table,
    scope: &'static str,
    errors: &'a mut Vec<String>,
}

impl<'a> Fields<'a> {
    fn name(&self, key: &str) -> String {
        if self.scope.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.scope)
        }
    }

    fn reject_unknown(&mut self, allowed: &[&str]) {
        for key in self.table.keys() {
            if !allowed.contains(&key.as_str()) {
                let msg = unknown_key(key, self.scope, allowed);
                self.errors.push(msg);
            }
        }
    }

    fn missing(&mut self, key: &str) {
        let msg = format!("missing required field `{}`", self.name(key));
        self.errors.push(msg);
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            other => {
                let msg = format!("`{}` must be a number, got {}", self.name(key), other.type_str());
                self.errors.push(msg);
                None
            }
        }
    }

    fn float_or(&mut self, key: &str, default: f64) -> f64 {
        self.float(key).unwrap_or(default)
    }

    fn float_req(&mut self, key: &str) -> Option<f64> {
        if !self.table.contains_key(key) {
            self.missing(key);
        }
        self.float(key)
    }

    fn int(&mut self, key: &str) -> Option<u64> {
        match self.table.get(key)? {
            toml::Value::Integer(i) if *i >= 0 => Some(*i as u64),
            other => {
                let msg = format!("`{}` must be a non-negative integer, got {}", self.name(key), other);
                self.errors.push(msg);
                None
            }
        }
    }

    fn int_req(&mut self, key: &str) -> Option<u64> {
        if !self.table.contains_key(key) {
            self.missing(key);
        }
        self.int(key)
    }

    fn string(&mut self, key: &str) -> Option<&'a str> {
        match self.table.get(key)? {
            toml::Value::String(s) => Some(s.as_str()),
            other => {
                let msg = format!("`{}` must be a string, got {}", self.name(key), other.type_str());
                self.errors.push(msg);
                None
            }
        }
    }

    /// A number or an array of numbers.
    fn floats(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.table.get(key)?;
        let as_f = |v: &toml::Value| match v {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        let out = match v {
            toml::Value::Array(a) => a.iter().map(as_f).collect::<Option<Vec<f64>>>(),
            other => as_f(other).map(|f| vec![f]),
        };
        if out.is_none() {
            let msg = format!("`{}` must be a number or an array of numbers", self.name(key));
            self.errors.push(msg);
        }
        out
    }

    fn strings(&mut self, key: &str) -> Option<Vec<&'a str>> {
        let out = match self.table.get(key)? {
            toml::Value::Array(a) => a.iter().map(|v| v.as_str()).collect::<Option<Vec<_>>>(),
            toml::Value::String(s) => Some(vec![s.as_str()]),
            _ => None,
        };
        if out.is_none() {
            let msg = format!("`{}` must be a string or an array of strings", self.name(key));
            self.errors.push(msg);
        }
        out
    }

    fn check(&mut self, key: &str, value: f64, ok: bool, range: &str) {
        if !ok {
            let msg = format!("{} must lie in {range}, got {value}", self.name(key));
            self.errors.push(msg);
        }
    }

    fn open_unit(&mut self, key: &str, value: f64) {
        self.check(key, value, value > 0.0 && value < 1.0, "(0,1)");
    }

    fn positive(&mut self, key: &str, value: f64) {
        self.check(key, value, value > 0.0 && value.is_finite(), "(0,∞)");
    }

    fn horizon(&mut self) -> f64 {
        let t = match (self.table.contains_key("T"), self.table.contains_key("horizon")) {
            (true, true) => {
                self.errors.push("give only one of `T` and `horizon`".into());
                None
            }
            (true, false) => self.float("T"),
            (false, true) => self.float("horizon"),
            (false, false) => {
                self.missing("T");
                None
            }
        };
        let t = t.unwrap_or(1.0);
        self.positive("T", t);
        t
    }

    fn resolution(&mut self, key: &str) -> u32 {
        match self.int_req(key) {
            Some(0) => {
                self.errors.push(format!("{} must be at least 1", self.name(key)));
                1
            }
            Some(v) if v > u32::MAX as u64 => {
                self.errors.push(format!("{} is too large", self.name(key)));
                1
            }
            Some(v) => v as u32,
            None => 1,
        }
    }
}

fn sub_table<'a>(table: &'a Table, key: &str, errors: &mut Vec<String>) -> Option<&'a Table> {
    match table.get(key)? {
        toml::Value::Table(t) => Some(t),
        other => {
            errors.push(format!("`{key}` must be a table, got {}", other.type_str()));
            None
        }
    }
}

fn parse_model(table: &Table, errors: &mut Vec<String>) -> ModelConfig {
    let fallback = ModelConfig::Gbm {
        mu: 0.05,
        sigma: 0.2,
        x0: 1.0,
    };
    let empty = Table::new();
    let (name, params) = match table.get("model") {
        None => {
            errors.push("missing required field `model`".into());
            return fallback;
        }
        Some(toml::Value::String(s)) => (s.as_str(), &empty),
        Some(toml::Value::Table(t)) => match t.get("name").and_then(|v| v.as_str()) {
            Some(name) => (name, t),
            None => {
                errors.push("missing required field `model.name`".into());
                return fallback;
            }
        },
        Some(other) => {
            errors.push(format!("`model` must be a string or a table, got {}", other.type_str()));
            return fallback;
        }
    };
    let mut f = Fields {
        table: params,
        scope: "model",
        errors,
    };
    let model = match name {
        "gbm" => {
            f.reject_unknown(&["name", "mu", "sigma", "x0"]);
            ModelConfig::Gbm {
                mu: f.float_or("mu", 0.05),
                sigma: f.float_or("sigma", 0.2),
                x0: f.float_or("x0", 1.0),
            }
        }
        "jump-gbm" => {
            f.reject_unknown(&["name", "mu", "sigma", "jump", "x0"]);
            ModelConfig::JumpGbm {
                mu: f.float_or("mu", 0.05),
                sigma: f.float_or("sigma", 0.2),
                jump: f.float_or("jump", 0.1),
                x0: f.float_or("x0", 1.0),
            }
        }
        "delay-ode" => {
            f.reject_unknown(&["name"]);
            ModelConfig::DelayOde
        }
        "linear" => {
            f.reject_unknown(&["name", "sigma", "x0"]);
            ModelConfig::Linear {
                sigma: f.float_or("sigma", 0.5),
                x0: f.float_or("x0", 1.0),
            }
        }
        "superlinear" => {
            f.reject_unknown(&["name", "x0"]);
            ModelConfig::Superlinear {
                x0: f.float_or("x0", 1.0),
            }
        }
        "zero" => {
            f.reject_unknown(&["name", "delay", "value"]);
            let delay = f.float_or("delay", 1.0);
            f.positive("delay", delay);
            ModelConfig::Zero {
                delay,
                value: f.floats("value").unwrap_or_else(|| vec![0.0]),
            }
        }
        other => {
            f.errors.push(format!(
                "unknown model `{other}` (expected gbm, jump-gbm, delay-ode, linear, superlinear or zero)"
            ));
            fallback
        }
    };
    if let ModelConfig::Gbm { sigma, .. } | ModelConfig::JumpGbm { sigma, .. } | ModelConfig::Linear { sigma, .. } =
        &model
    {
        if *sigma < 0.0 {
            errors.push(format!("model.sigma must be non-negative, got {sigma}"));
        }
    }
    model
}

fn parse_noise(table: &Table, horizon: f64, errors: &mut Vec<String>) -> NoiseConfig {
    let mut cfg = NoiseConfig {
        horizon,
        ..NoiseConfig::default()
    };
    let Some(t) = sub_table(table, "noise", errors) else {
        return cfg;
    };
    let mut f = Fields {
        table: t,
        scope: "noise",
        errors,
    };
    f.reject_unknown(&["wiener", "rate", "rate_slope", "rate_bound", "marks"]);
    cfg.wiener = f.int("wiener").unwrap_or(1) as usize;
    cfg.rate = f.float_or("rate", 0.0);
    cfg.rate_slope = f.float_or("rate_slope", 0.0);
    cfg.rate_bound = f.float("rate_bound");
    if cfg.rate < 0.0 || cfg.rate + cfg.rate_slope * horizon < 0.0 {
        f.errors.push("noise intensity must stay non-negative on [0, T]".into());
    }
    if let Some(b) = cfg.rate_bound {
        if b < cfg.rate.max(cfg.rate + cfg.rate_slope * horizon) {
            f.errors
                .push(format!("noise.rate_bound = {b} is below the intensity on [0, T]"));
        }
    }
    let marks = match t.get("marks") {
        None => MarksConfig::Unmarked,
        Some(toml::Value::String(s)) if s == "unmarked" => MarksConfig::Unmarked,
        Some(toml::Value::Table(m)) => {
            let mut mf = Fields {
                table: m,
                scope: "noise.marks",
                errors: f.errors,
            };
            match mf.string("kind") {
                Some("unmarked") => {
                    mf.reject_unknown(&["kind"]);
                    MarksConfig::Unmarked
                }
                Some("uniform") => {
                    mf.reject_unknown(&["kind", "lo", "hi"]);
                    let lo = mf.floats("lo").unwrap_or_default();
                    let hi = mf.floats("hi").unwrap_or_default();
                    if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                        mf.errors
                            .push("noise.marks needs non-empty `lo` < `hi` of equal length".into());
                    }
                    MarksConfig::Uniform { lo, hi }
                }
                Some("categorical") => {
                    mf.reject_unknown(&["kind", "weights"]);
                    let weights = mf.floats("weights").unwrap_or_default();
                    let total: f64 = weights.iter().sum();
                    if weights.is_empty() || weights.iter().any(|w| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
                        mf.errors
                            .push("noise.marks.weights must be non-negative and sum to 1".into());
                    }
                    MarksConfig::Categorical { weights }
                }
                _ => {
                    mf.errors
                        .push("noise.marks.kind must be unmarked, uniform or categorical".into());
                    MarksConfig::Unmarked
                }
            }
        }
        Some(_) => {
            errors.push("noise.marks must be \"unmarked\" or a table".into());
            MarksConfig::Unmarked
        }
    };
    cfg.marks = marks;
    cfg
}

fn parse_pair(table: &Table, errors: &mut Vec<String>) -> DominatedPair {
    let fallback = DominatedPair::BrownianSquare { steps: 2048 };
    let Some(t) = sub_table(table, "pair", errors) else {
        if !table.contains_key("pair") {
            errors.push("missing required field `pair`".into());
        }
        return fallback;
    };
    let mut f = Fields {
        table: t,
        scope: "pair",
        errors,
    };
    match f.string("kind") {
        Some("brownian-square") => {
            f.reject_unknown(&["kind", "steps"]);
            DominatedPair::BrownianSquare {
                steps: f.int("steps").unwrap_or(2048).max(1) as usize,
            }
        }
        Some("deterministic") => {
            f.reject_unknown(&["kind", "level"]);
            let level = f.float_or("level", 1.0);
            f.check("level", level, level >= 0.0, "[0,∞)");
            DominatedPair::Deterministic { level }
        }
        Some("counting") => {
            f.reject_unknown(&["kind", "rate", "T"]);
            let rate = f.float_or("rate", 1.0);
            let horizon = f.float_or("T", 1.0);
            f.positive("rate", rate);
            f.positive("T", horizon);
            DominatedPair::Counting { rate, horizon }
        }
        _ => {
            f.errors
                .push("pair.kind must be brownian-square, deterministic or counting".into());
            fallback
        }
    }
}

/// Parses and validates a configuration, collecting every error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: Table = text
        .parse()
        .map_err(|e: toml::de::Error| SdeError::Config(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let mut f = Fields {
        table: &raw,
        scope: "",
        errors: &mut errors,
    };
    let kind = match f.string("kind") {
        Some(s) => match s.parse::<Kind>() {
            Ok(k) => Some(k),
            Err(_) => {
                let names: Vec<&str> = Kind::ALL.iter().map(|k| k.as_str()).collect();
                f.errors
                    .push(format!("unknown kind `{s}` (expected one of {})", names.join(", ")));
                None
            }
        },
        None => {
            if !raw.contains_key("kind") {
                f.missing("kind");
            }
            None
        }
    };
    let seed = f.int_req("seed").unwrap_or(0);
    let output = f
        .string("output")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    let threads = f.int("threads").map(|t| t as usize);
    if threads == Some(0) {
        f.errors.push("threads must be at least 1".into());
    }
    let Some(kind) = kind else {
        return Err(SdeError::Config(errors));
    };
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(kind.keys()).copied().collect();
    f.reject_unknown(&allowed);

    let needs_replications = kind != Kind::CheckConditions;
    let replications = if needs_replications {
        f.int_req("replications").unwrap_or(0) as usize
    } else {
        0
    };
    let p_list = |f: &mut Fields| -> Vec<f64> {
        let ps = f.floats("p").unwrap_or_else(|| vec![0.5]);
        if ps.is_empty() {
            f.errors.push("p must not be empty".into());
        }
        for &p in &ps {
            f.open_unit("p", p);
        }
        ps
    };

    let task = match kind {
        Kind::Simulate => {
            let horizon = f.horizon();
            let n = f.resolution("n");
            let save_paths = f.int("save_paths").unwrap_or(0) as usize;
            let model = parse_model(&raw, f.errors);
            let noise = parse_noise(&raw, horizon, f.errors);
            Task::Simulate {
                model,
                noise,
                n,
                horizon,
                save_paths,
            }
        }
        Kind::Convergence => {
            let horizon = f.horizon();
            let resolutions: Vec<u32> = f
                .floats("resolutions")
                .unwrap_or_else(|| vec![8.0, 16.0, 32.0, 64.0, 128.0])
                .into_iter()
                .map(|r| r as u32)
                .collect();
            let finest = resolutions.iter().copied().max().unwrap_or(0);
            if resolutions.len() < 2 || resolutions.iter().any(|&r| r == 0 || finest % r != 0) {
                f.errors
                    .push("resolutions needs at least two positive values dividing the largest".into());
            }
            let epsilon = f.float("epsilon");
            if let Some(e) = epsilon {
                f.positive("epsilon", e);
            }
            let model = parse_model(&raw, f.errors);
            let noise = parse_noise(&raw, horizon, f.errors);
            Task::Convergence {
                model,
                noise,
                resolutions,
                horizon,
                epsilon,
            }
        }
        Kind::VerifyGronwall => {
            let horizon = f.horizon();
            let n = f.resolution("n");
            let p = p_list(&mut f);
            let variant = match f.string("variant").unwrap_or("c").parse::<Variant>() {
                Ok(v) => v,
                Err(e) => {
                    f.errors.push(e.to_string());
                    Variant::C
                }
            };
            let (mu, sigma, x0) = match parse_model(&raw, f.errors) {
                ModelConfig::Gbm { mu, sigma, x0 } => (mu, sigma, x0),
                other => {
                    errors.push(format!("verify-gronwall needs model gbm, got {}", other.name()));
                    (0.0, 0.0, 1.0)
                }
            };
            Task::VerifyGronwall {
                mu,
                sigma,
                x0,
                n,
                horizon,
                p,
                variant,
            }
        }
        Kind::Lenglart => {
            let p = p_list(&mut f);
            let c = f.float_or("c", 1.0);
            let d = f.float_or("d", 1.0);
            f.positive("c", c);
            f.positive("d", d);
            let pair = parse_pair(&raw, f.errors);
            Task::Lenglart { pair, p, c, d }
        }
        Kind::Counterexample => {
            let q = f.floats("q").unwrap_or_else(|| vec![0.5, 0.9, 0.99]);
            for &v in &q {
                f.open_unit("q", v);
            }
            let alpha = f.float_or("alpha", 0.5);
            f.open_unit("alpha", alpha);
            let p = f.float_or("p", 0.5);
            f.open_unit("p", p);
            Task::Counterexample { q, alpha, p }
        }
        Kind::CheckConditions => {
            let horizon = f.horizon();
            let radius = f.float_req("R").unwrap_or(1.0);
            f.positive("R", radius);
            let samples = f.int_req("samples").unwrap_or(0) as usize;
            let max_breakpoints = f.int("max_breakpoints").unwrap_or(8).max(1) as usize;
            let conditions = f
                .strings("conditions")
                .unwrap_or_else(|| vec!["C1", "C2", "C3", "C4", "C5"])
                .into_iter()
                .filter_map(|c| match c.parse::<Condition>() {
                    Ok(c) => Some(c),
                    Err(e) => {
                        f.errors.push(e.to_string());
                        None
                    }
                })
                .collect();
            let model = parse_model(&raw, f.errors);
            let noise = parse_noise(&raw, horizon, f.errors);
            Task::CheckConditions {
                model,
                noise,
                conditions,
                radius,
                samples,
                horizon,
                max_breakpoints,
            }
        }
    };
    if !errors.is_empty() {
        return Err(SdeError::Config(errors));
    }
    Ok(ExperimentConfig {
        kind,
        seed,
        replications,
        output,
        threads,
        task,
        raw,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| SdeError::io(path, e))?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Violation => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub report: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| SdeError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| SdeError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| SdeError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        self.write(name, |w| {
            writeln!(w, "{}", header.join(","))?;
            for r in rows {
                writeln!(w, "{}", r.join(","))?;
            }
            Ok(())
        })
    }
}

fn estimate_json(e: &Estimate) -> Value {
    json!({ "mean": e.mean, "std_err": e.std_err, "ci": [e.lower, e.upper], "samples": e.samples })
}

fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs an experiment and writes its artifacts; a `Violation` outcome means
/// some checked inequality failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SdeError::Argument(format!("cannot start {n} worker threads: {e}")))?
            .install(|| run_inner(cfg)),
        None => run_inner(cfg),
    }
}

fn run_inner(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let mut out = Artifacts::create(&cfg.output)?;
    let seed = cfg.seed;
    let reps = cfg.replications;
    let (outcome, results) = match &cfg.task {
        Task::Simulate {
            model,
            noise,
            n,
            horizon,
            save_paths,
        } => {
            let m = model.build(noise)?;
            let spec = noise.build();
            let paths = replicate(reps, |rep| euler_solve_sampled(&m, &spec, *n, *horizon, seed, rep))?;
            let d = m.dim();
            let mut header = vec!["replication".to_string()];
            header.extend((1..=d).map(|i| format!("x_{i}")));
            let rows: Vec<Vec<String>> = paths
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    std::iter::once(i.to_string())
                        .chain(p.terminal().iter().map(|v| v.to_string()))
                        .collect()
                })
                .collect();
            out.csv("terminal.csv", &header, &rows)?;
            for (i, p) in paths.iter().take(*save_paths).enumerate() {
                out.write(&format!("path_{i}.csv"), |w| p.write_csv(w))?;
            }
            let means: Vec<Value> = (0..d)
                .map(|j| {
                    let col: Vec<f64> = paths.iter().map(|p| p.terminal()[j]).collect();
                    if col.is_empty() {
                        Value::Null
                    } else {
                        estimate_json(&Estimate::from_samples(&col, Z_TWO_SIDED_99))
                    }
                })
                .collect();
            (Outcome::Success, json!({ "model": m.name, "terminal": means }))
        }
        Task::Convergence {
            model,
            noise,
            resolutions,
            horizon,
            epsilon,
        } => {
            let m = model.build(noise)?;
            let spec = noise.build();
            let mut results = serde_json::Map::new();
            let mut header = headers(&["n"]);
            let mut rows: Vec<Vec<String>> = resolutions.iter().map(|n| vec![n.to_string()]).collect();
            if let ModelConfig::Gbm { mu, sigma, x0 } = *model {
                if reps > 0 && !spec.has_jumps() {
                    let study = strong_error_study(&m, &spec, resolutions, *horizon, reps, seed, |noise| {
                        let w = noise.wiener_at_cell(noise.cells(), 0);
                        vec![models::gbm_exact(x0, mu, sigma, noise.horizon(), w)]
                    })?;
                    header.extend(headers(&["error_mean", "error_std_err"]));
                    for (row, e) in rows.iter_mut().zip(&study.errors) {
                        row.push(e.mean.to_string());
                        row.push(e.std_err.to_string());
                    }
                    results.insert("strong_error_slope".into(), json!(study.slope));
                    results.insert(
                        "strong_errors".into(),
                        Value::Array(study.errors.iter().map(estimate_json).collect()),
                    );
                }
            }
            if let Some(eps) = epsilon {
                header.extend(headers(&["gap_probability", "gap_lower", "gap_upper"]));
                let mut gaps = Vec::new();
                for (row, &n) in rows.iter_mut().zip(resolutions) {
                    let g = resolution_gap(&m, &spec, n, 2 * n, *horizon, *eps, reps, seed)?;
                    row.extend([g.estimate.to_string(), g.lower.to_string(), g.upper.to_string()]);
                    gaps.push(json!({ "n": n, "m": 2 * n, "probability": g.estimate, "ci": [g.lower, g.upper] }));
                }
                results.insert("resolution_gap".into(), Value::Array(gaps));
            }
            out.csv("convergence.csv", &header, &rows)?;
            (Outcome::Success, Value::Object(results))
        }
        Task::VerifyGronwall {
            mu,
            sigma,
            x0,
            n,
            horizon,
            p,
            variant,
        } => {
            let ens = gbm_square_ensemble(*mu, *sigma, *x0, *n, *horizon, reps, seed)?;
            let mut reports = Vec::new();
            for &pi in p {
                reports.push(verify_gronwall(&ens, *variant, pi)?);
            }
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.variant.to_string(),
                        r.p.to_string(),
                        r.lhs.to_string(),
                        r.lhs_ci[0].to_string(),
                        r.lhs_ci[1].to_string(),
                        r.rhs.to_string(),
                        if r.verdict.holds() { "holds" } else { "violated" }.to_string(),
                    ]
                })
                .collect();
            out.csv(
                "gronwall.csv",
                &headers(&["variant", "p", "lhs", "lhs_lower", "lhs_upper", "rhs", "verdict"]),
                &rows,
            )?;
            let outcome = if reports.iter().all(|r| r.verdict.holds()) {
                Outcome::Success
            } else {
                Outcome::Violation
            };
            (outcome, json!({ "reports": reports }))
        }
        Task::Lenglart { pair, p, c, d } => {
            let sample = pair.sample(reps, seed)?;
            let mut rows = Vec::new();
            let mut verdicts = Vec::new();
            let tail = lenglart_tail(&sample, *c, *d)?;
            rows.push(vec![
                "tail".to_string(),
                String::new(),
                tail.lhs.mean.to_string(),
                tail.rhs.mean.to_string(),
                verdict_str(tail.verdict).into(),
            ]);
            verdicts.push(tail.verdict);
            let mut moments = Vec::new();
            for &pi in p {
                let r = lenglart_moment(&sample, pi)?;
                rows.push(vec![
                    "moment".to_string(),
                    pi.to_string(),
                    r.lhs.mean.to_string(),
                    r.rhs.mean.to_string(),
                    verdict_str(r.verdict).into(),
                ]);
                verdicts.push(r.verdict);
                moments.push(json!({ "p": pi, "report": r }));
            }
            out.csv(
                "lenglart.csv",
                &headers(&["bound", "p", "lhs", "rhs", "verdict"]),
                &rows,
            )?;
            let outcome = if verdicts.iter().all(|v| v.holds()) {
                Outcome::Success
            } else {
                Outcome::Violation
            };
            (outcome, json!({ "tail": tail, "c": c, "d": d, "moments": moments }))
        }
        Task::Counterexample { q, alpha, p } => {
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            for (i, &qi) in q.iter().enumerate() {
                let s = counterexample_stats(qi, *alpha, *p, reps, crate::rng::nested_stream(seed, i as u64))?;
                let mc = |e: &Estimate| {
                    if e.samples == 0 {
                        String::new()
                    } else {
                        e.mean.to_string()
                    }
                };
                rows.push(vec![
                    qi.to_string(),
                    p.to_string(),
                    alpha.to_string(),
                    mc(&s.lhs_mc),
                    s.lhs_exact.to_string(),
                    mc(&s.h_moment_mc),
                    s.h_moment_exact.to_string(),
                ]);
                stats.push(s);
            }
            out.csv(
                "counterexample.csv",
                &headers(&[
                    "q",
                    "p",
                    "alpha",
                    "lhs_mc",
                    "lhs_exact",
                    "h_moment_mc",
                    "h_moment_exact",
                ]),
                &rows,
            )?;
            (Outcome::Success, json!({ "sweep": stats }))
        }
        Task::CheckConditions {
            model,
            noise,
            conditions,
            radius,
            samples,
            horizon,
            max_breakpoints,
        } => {
            let m = model.build(noise)?;
            let spec = noise.build();
            let sampler = RandomPathSampler {
                radius: *radius,
                max_breakpoints: *max_breakpoints,
                horizon: *horizon,
            };
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for &c in conditions {
                let r = check_condition(&m, &spec, c, *radius, &sampler, *samples, seed)?;
                r.write_witnesses(&out.dir)?;
                rows.push(vec![
                    c.to_string(),
                    r.samples.to_string(),
                    r.violations.len().to_string(),
                ]);
                reports.push(r);
            }
            out.csv(
                "conditions.csv",
                &headers(&["condition", "samples", "violations"]),
                &rows,
            )?;
            let outcome = if reports.iter().all(|r| r.passed()) {
                Outcome::Success
            } else {
                Outcome::Violation
            };
            (outcome, json!({ "model": m.name, "reports": reports }))
        }
    };
    let mut config = cfg.raw.clone();
    config.insert("seed".into(), toml::Value::Integer(seed as i64));
    let report = json!({
        "kind": cfg.kind.as_str(),
        "seed": seed,
        "replications": reps,
        "config": config,
        "results": results,
        "outcome": match outcome {
            Outcome::Success => "success",
            Outcome::Violation => "violation",
        },
        "metadata": {
            "generated_at_unix": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            "version": env!("CARGO_PKG_VERSION"),
        },
    });
    out.write("report.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    })?;
    let report_path = out.written.last().cloned().expect("report written");
    Ok(RunSummary {
        outcome,
        report: report_path,
        artifacts: out.written,
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    if v.holds() {
        "holds"
    } else {
        "violated"
    }
}
