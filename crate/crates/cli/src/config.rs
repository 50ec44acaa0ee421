//! Run configuration: a flat `key = value` file layered under command-line
//! overrides and over per-command defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use resolvent_kit::analysis::ResonanceCriterion;
use resolvent_kit::basis::BasisFamily;
use resolvent_kit::potential::parse_potential;
use serde::Serialize;

pub const THREADS_ENV: &str = "RESOLVENT_KIT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Smatrix,
    Resonances,
    BoundStates,
    Dos,
    Resolvent,
    Selftest,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Smatrix => "smatrix",
            CommandKind::Resonances => "resonances",
            CommandKind::BoundStates => "bound-states",
            CommandKind::Dos => "dos",
            CommandKind::Resolvent => "resolvent",
            CommandKind::Selftest => "selftest",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommandKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "smatrix" => Ok(CommandKind::Smatrix),
            "resonances" | "resonant-scan" => Ok(CommandKind::Resonances),
            "bound-states" => Ok(CommandKind::BoundStates),
            "dos" => Ok(CommandKind::Dos),
            "resolvent" => Ok(CommandKind::Resolvent),
            "selftest" => Ok(CommandKind::Selftest),
            other => Err(ConfigError::new(format!("unknown command `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DosKind {
    Smoothing,
    Continuation,
}

/// Evaluation route for the `resolvent` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    Spectral,
    Cofactor,
    EigenProduct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Every accepted key, in canonical spelling.
pub const KEYS: &[&str] = &[
    "command",
    "family",
    "lambda",
    "ell",
    "charge",
    "size",
    "potential",
    "e_min",
    "e_max",
    "steps",
    "criterion",
    "prominence",
    "refine",
    "dos_method",
    "width",
    "contour",
    "fit_order",
    "max_fit_residual",
    "row",
    "col",
    "eta",
    "formula",
    "csv",
    "json",
    "gnuplot_script",
    "threads",
    "seed",
    "trials",
];

/// Canonical key for a spelling used in files or on the command line.
pub fn canonical_key(key: &str) -> Result<&'static str, ConfigError> {
    let k = key.trim();
    // N and Z keep the physics spelling
    let alias = match k {
        "N" => Some("size"),
        "Z" => Some("charge"),
        _ => None,
    };
    if let Some(a) = alias {
        return Ok(a);
    }
    let lower = k.to_ascii_lowercase().replace('-', "_");
    let mapped = match lower.as_str() {
        "basis" => "family",
        "l" => "ell",
        "emin" => "e_min",
        "emax" => "e_max",
        "points" => "steps",
        "v" => "potential",
        other => other,
    };
    KEYS.iter()
        .find(|&&c| c == mapped)
        .copied()
        .ok_or_else(|| ConfigError::new(format!("unknown configuration key `{k}`")))
}

/// Raw key/value layers, highest priority last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layers {
    values: BTreeMap<&'static str, String>,
}

impl Layers {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let k = canonical_key(key)?;
        self.values.insert(k, value.into());
        Ok(())
    }

    /// Later layers win.
    pub fn overlay(&mut self, other: &Layers) {
        for (k, v) in &other.values {
            self.values.insert(k, v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parse a `key = value` file. `#` starts a comment; blank lines are
/// skipped; values may be wrapped in double quotes.
pub fn parse_config_text(text: &str) -> Result<Layers, ConfigError> {
    let mut layers = Layers::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::new(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            )));
        };
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        layers
            .set(k, v)
            .map_err(|e| ConfigError::new(format!("line {}: {}", i + 1, e.message)))?;
    }
    Ok(layers)
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Defaults that depend on the command.
fn defaults(command: CommandKind) -> Layers {
    let mut d = Layers::new();
    let mut put = |k: &'static str, v: &str| {
        d.values.insert(k, v.to_string());
    };
    put("family", "laguerre");
    put("lambda", "1");
    put("ell", "0");
    put("charge", "0");
    put("size", "60");
    put("potential", "0");
    put("e_min", "0.1");
    put("e_max", "8");
    put("steps", "400");
    put("criterion", "im-s");
    put("refine", "true");
    put("dos_method", "smoothing");
    put("contour", "0.5");
    put("fit_order", "8");
    put("max_fit_residual", "0.01");
    put("row", "0");
    put("col", "0");
    put("eta", "0");
    put("formula", "spectral");
    put("seed", "20240917");
    put("trials", "20");
    match command {
        CommandKind::BoundStates => {
            put("size", "15");
            put("lambda", "10");
            put("e_min", "-10");
            put("e_max", "-0.01");
            put("steps", "1000");
        }
        CommandKind::Dos => {
            put("family", "oscillator");
        }
        _ => {}
    }
    d
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub family: BasisFamily,
    pub lambda: f64,
    pub ell: u32,
    pub charge: f64,
    pub size: usize,
    /// Canonical printed form of the parsed expression.
    pub potential: String,
    pub e_min: f64,
    pub e_max: f64,
    /// Number of grid points, both ends included.
    pub steps: usize,
    pub criterion: ResonanceCriterion,
    /// `None` picks the criterion's default.
    pub prominence: Option<f64>,
    /// Add pole-guided windows to S-matrix grids.
    pub refine: bool,
    pub dos_method: DosKind,
    /// Fixed smoothing width; `None` uses five local pole spacings.
    pub width: Option<f64>,
    pub contour: f64,
    pub fit_order: usize,
    pub max_fit_residual: f64,
    pub row: usize,
    pub col: usize,
    pub eta: f64,
    pub formula: Formula,
    pub csv: Option<String>,
    pub json: Option<String>,
    pub gnuplot_script: Option<String>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub trials: usize,
}

fn parse_num<T: FromStr>(layers: &Layers, key: &str) -> Result<T, ConfigError> {
    let raw = layers.get(key).unwrap_or_default();
    raw.trim()
        .parse()
        .map_err(|_| ConfigError::new(format!("{key}: cannot parse `{raw}`")))
}

fn parse_opt<T: FromStr>(layers: &Layers, key: &str) -> Result<Option<T>, ConfigError> {
    match layers.get(key) {
        None => Ok(None),
        Some(s) if s.trim().is_empty() || s.trim() == "auto" => Ok(None),
        Some(_) => parse_num(layers, key).map(Some),
    }
}

fn parse_bool(layers: &Layers, key: &str) -> Result<bool, ConfigError> {
    match layers.get(key).unwrap_or_default().trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(ConfigError::new(format!("{key}: expected true or false, got `{other}`"))),
    }
}

fn path_opt(layers: &Layers, key: &str) -> Option<String> {
    layers
        .get(key)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

impl RunConfig {
    /// Resolve `defaults < env < file < cli` for `command`.
    pub fn resolve(
        command: CommandKind,
        file: &Layers,
        cli: &Layers,
        env_threads: Option<&str>,
    ) -> Result<Self, ConfigError> {
        if let Some(c) = file.get("command") {
            let from_file: CommandKind = c.parse()?;
            if from_file != command {
                return Err(ConfigError::new(format!(
                    "config file is for `{from_file}` but `{command}` was requested"
                )));
            }
        }
        let mut layers = defaults(command);
        if let Some(t) = env_threads {
            layers.values.insert("threads", t.to_string());
        }
        layers.overlay(file);
        layers.overlay(cli);
        Self::from_layers(command, &layers)
    }

    fn from_layers(command: CommandKind, l: &Layers) -> Result<Self, ConfigError> {
        let family: BasisFamily = l
            .get("family")
            .unwrap_or_default()
            .parse()
            .map_err(|e: resolvent_kit::Error| ConfigError::new(format!("family: {e}")))?;
        let potential_text = l.get("potential").unwrap_or("0");
        let potential = parse_potential(potential_text)
            .map_err(|e| ConfigError::new(format!("potential: {e}")))?;
        let criterion: ResonanceCriterion = l
            .get("criterion")
            .unwrap_or_default()
            .parse()
            .map_err(|e: resolvent_kit::Error| ConfigError::new(format!("criterion: {e}")))?;
        let dos_method = match l.get("dos_method").unwrap_or_default().trim() {
            "smoothing" => DosKind::Smoothing,
            "continuation" => DosKind::Continuation,
            other => {
                return Err(ConfigError::new(format!(
                    "dos_method: expected smoothing or continuation, got `{other}`"
                )))
            }
        };
        let formula = match l.get("formula").unwrap_or_default().trim() {
            "spectral" => Formula::Spectral,
            "cofactor" => Formula::Cofactor,
            "eigen-product" | "eigenproduct" | "eigprod" => Formula::EigenProduct,
            other => {
                return Err(ConfigError::new(format!(
                    "formula: expected spectral, cofactor or eigen-product, got `{other}`"
                )))
            }
        };
        let cfg = RunConfig {
            command,
            family,
            lambda: parse_num(l, "lambda")?,
            ell: parse_num(l, "ell")?,
            charge: parse_num(l, "charge")?,
            size: parse_num(l, "size")?,
            potential: potential.to_string(),
            e_min: parse_num(l, "e_min")?,
            e_max: parse_num(l, "e_max")?,
            steps: parse_num(l, "steps")?,
            criterion,
            prominence: parse_opt(l, "prominence")?,
            refine: parse_bool(l, "refine")?,
            dos_method,
            width: parse_opt(l, "width")?,
            contour: parse_num(l, "contour")?,
            fit_order: parse_num(l, "fit_order")?,
            max_fit_residual: parse_num(l, "max_fit_residual")?,
            row: parse_num(l, "row")?,
            col: parse_num(l, "col")?,
            eta: parse_num(l, "eta")?,
            formula,
            csv: path_opt(l, "csv"),
            json: path_opt(l, "json"),
            gnuplot_script: path_opt(l, "gnuplot_script"),
            threads: parse_opt(l, "threads")?,
            seed: parse_num(l, "seed")?,
            trials: parse_num(l, "trials")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            ("lambda", self.lambda),
            ("charge", self.charge),
            ("e_min", self.e_min),
            ("e_max", self.e_max),
            ("eta", self.eta),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return Err(ConfigError::new(format!("{k} must be finite, got {v}")));
            }
        }
        if !(self.lambda > 0.0) {
            return Err(ConfigError::new(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.size < 2 {
            return Err(ConfigError::new(format!("N must be at least 2, got {}", self.size)));
        }
        if self.steps < 1 {
            return Err(ConfigError::new("steps must be at least 1"));
        }
        if !(self.e_min < self.e_max) {
            return Err(ConfigError::new(format!(
                "E_min must be below E_max, got e_min = {} and e_max = {}",
                self.e_min, self.e_max
            )));
        }
        if matches!(self.command, CommandKind::Smatrix | CommandKind::Resonances) && !(self.e_min > 0.0)
        {
            return Err(ConfigError::new(format!(
                "scattering energies must be positive, got e_min = {}",
                self.e_min
            )));
        }
        if self.threads == Some(0) {
            return Err(ConfigError::new("threads must be at least 1"));
        }
        if self.row >= self.size || self.col >= self.size {
            return Err(ConfigError::new(format!(
                "row and col must be below N = {}, got ({}, {})",
                self.size, self.row, self.col
            )));
        }
        if let Some(w) = self.width {
            if !(w > 0.0) {
                return Err(ConfigError::new(format!("width must be positive, got {w}")));
            }
        }
        if let Some(p) = self.prominence {
            if !(p >= 0.0) {
                return Err(ConfigError::new(format!("prominence must be non-negative, got {p}")));
            }
        }
        Ok(())
    }

    /// Output paths default to `<command>.csv` and `<command>.json`.
    pub fn csv_path(&self) -> String {
        self.csv
            .clone()
            .unwrap_or_else(|| format!("{}.csv", self.command))
    }

    pub fn json_path(&self) -> String {
        self.json
            .clone()
            .unwrap_or_else(|| format!("{}.json", self.command))
    }
}
