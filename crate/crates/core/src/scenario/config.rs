use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Syntax(String),
    #[error("config defines no scenarios")]
    Empty,
    #[error("top-level key `{0}` must be a [section]")]
    NotASection(String),
    #[error("[{section}]: missing required key `{key}` for scenario {kind}")]
    MissingKey {
        section: String,
        kind: ScenarioKind,
        key: &'static str,
    },
    #[error("[{section}]: missing required key `scenario`")]
    MissingScenario { section: String },
    #[error("[{section}]: unknown key `{key}`")]
    UnknownKey { section: String, key: String },
    #[error("[{section}]: `{key}` must be {expected}")]
    TypeMismatch {
        section: String,
        key: String,
        expected: &'static str,
    },
    #[error("[{section}]: invalid `{key}`: {reason}")]
    InvalidValue {
        section: String,
        key: String,
        reason: String,
    },
    #[error("[{section}]: unknown scenario `{name}` (see list-scenarios)")]
    UnknownScenario { section: String, name: String },
    #[error("scenarios `{first}` and `{second}` write to the same file {path}")]
    DuplicateOutput {
        first: String,
        second: String,
        path: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    CoherentDrive,
    SinglePhoton,
    FockPulse,
    Faraday,
    OracleCompare,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        Self::CoherentDrive,
        Self::SinglePhoton,
        Self::FockPulse,
        Self::Faraday,
        Self::OracleCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CoherentDrive => "coherent-drive",
            Self::SinglePhoton => "single-photon",
            Self::FockPulse => "fock-pulse",
            Self::Faraday => "faraday",
            Self::OracleCompare => "oracle-compare",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::CoherentDrive => "resonant coherent beam: Rabi drive plus decay at kappa",
            Self::SinglePhoton => "square single-photon pulse, discrete recursion vs closed form",
            Self::FockPulse => "n-photon Fock pulse as a single Jaynes-Cummings mode",
            Self::Faraday => "off-resonant Faraday probe: QND dephasing at kappa",
            Self::OracleCompare => "exact slice-by-slice coherent beam vs its master equation",
        }
    }

    pub fn keys(self) -> &'static [Key] {
        match self {
            Self::CoherentDrive => COHERENT_DRIVE_KEYS,
            Self::SinglePhoton => SINGLE_PHOTON_KEYS,
            Self::FockPulse => FOCK_PULSE_KEYS,
            Self::Faraday => FARADAY_KEYS,
            Self::OracleCompare => ORACLE_COMPARE_KEYS,
        }
    }

    pub fn required_keys(self) -> impl Iterator<Item = &'static str> {
        self.keys().iter().filter(|k| k.required).map(|k| k.name)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Real,
    Count,
    State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Key {
    pub name: &'static str,
    pub required: bool,
    pub kind: KeyKind,
}

impl Key {
    const fn required(name: &'static str, kind: KeyKind) -> Self {
        Self {
            name,
            required: true,
            kind,
        }
    }
    const fn optional(name: &'static str, kind: KeyKind) -> Self {
        Self {
            name,
            required: false,
            kind,
        }
    }
}

use KeyKind::{Count, Real, State};

const GAMMA: Key = Key::optional("gamma", Real);

const COHERENT_DRIVE_KEYS: &[Key] = &[
    Key::required("kappa_over_gamma", Real),
    Key::required("rabi", Real),
    Key::required("t_final", Real),
    GAMMA,
    Key::optional("extra_decay", Real),
    Key::optional("step", Real),
    Key::optional("sample_every", Count),
    Key::optional("initial", State),
];

const SINGLE_PHOTON_KEYS: &[Key] = &[
    Key::required("kappa_over_gamma", Real),
    Key::required("gamma_tau", Real),
    Key::required("n_slices", Count),
    GAMMA,
    Key::optional("t_final", Real),
    Key::optional("sample_every", Count),
];

const FOCK_PULSE_KEYS: &[Key] = &[
    Key::required("kappa_over_gamma", Real),
    Key::required("gamma_tau", Real),
    Key::required("photons", Count),
    GAMMA,
    Key::optional("t_final", Real),
    Key::optional("samples", Count),
    Key::optional("max_gamma_tau", Real),
];

const FARADAY_KEYS: &[Key] = &[
    Key::required("kappa", Real),
    Key::required("t_final", Real),
    GAMMA,
    Key::optional("chi", Real),
    Key::optional("alpha_sq", Real),
    Key::optional("step", Real),
    Key::optional("sample_every", Count),
    Key::optional("initial", State),
];

const ORACLE_COMPARE_KEYS: &[Key] = &[
    Key::required("kappa_over_gamma", Real),
    Key::required("alpha_sq", Real),
    Key::required("kappa_dt", Real),
    Key::required("n_slices", Count),
    GAMMA,
    Key::optional("sample_every", Count),
    Key::optional("initial", State),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Ground,
    Excited,
    Plus,
}

impl InitialState {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ground => "ground",
            Self::Excited => "excited",
            Self::Plus => "plus",
        }
    }

    pub fn density(self) -> crate::quantum::DensityMatrix {
        use crate::quantum::DensityMatrix;
        match self {
            Self::Ground => DensityMatrix::ground(),
            Self::Excited => DensityMatrix::excited(),
            Self::Plus => DensityMatrix::plus(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// One validated scenario with every default resolved into `params`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    pub params: BTreeMap<String, f64>,
    pub initial: Option<InitialState>,
    pub output: PathBuf,
    pub format: OutputFormat,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Resolved numeric parameter. Panics on keys the scenario does not
    /// define; parsing guarantees every key the runner asks for.
    pub fn param(&self, key: &str) -> f64 {
        *self
            .params
            .get(key)
            .unwrap_or_else(|| panic!("parameter `{key}` not resolved for {}", self.kind))
    }

    pub fn count(&self, key: &str) -> usize {
        self.param(key) as usize
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

/// Scenarios of one config document, ordered by section name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchConfig {
    pub scenarios: Vec<ScenarioConfig>,
}

const META_KEYS: [&str; 4] = ["scenario", "output", "format", "seed"];

/// Parses a sectioned config. Each `[section]` is one scenario named after
/// the section:
///
/// ```toml
/// [fig2]
/// scenario = "single-photon"
/// kappa_over_gamma = 0.02
/// gamma_tau = 2.5
/// n_slices = 10000
/// ```
///
/// `output` (default `<section>.<format>`), `format` (default `csv`) and
/// `seed` (default 0) are accepted in every section.
pub fn parse_config(text: &str) -> Result<BatchConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    if table.is_empty() {
        return Err(ConfigError::Empty);
    }
    // toml::Table is a BTreeMap, so iteration is already ordered by name
    let mut scenarios = Vec::with_capacity(table.len());
    for (section, value) in &table {
        let body = value
            .as_table()
            .ok_or_else(|| ConfigError::NotASection(section.clone()))?;
        scenarios.push(parse_section(section, body)?);
    }

    let mut seen: BTreeMap<&PathBuf, &str> = BTreeMap::new();
    for s in &scenarios {
        if let Some(first) = seen.insert(&s.output, &s.name) {
            return Err(ConfigError::DuplicateOutput {
                first: first.to_string(),
                second: s.name.clone(),
                path: s.output.display().to_string(),
            });
        }
    }
    Ok(BatchConfig { scenarios })
}

fn parse_section(section: &str, body: &toml::Table) -> Result<ScenarioConfig, ConfigError> {
    let err_type = |key: &str, expected| ConfigError::TypeMismatch {
        section: section.to_string(),
        key: key.to_string(),
        expected,
    };
    let kind_name = body
        .get("scenario")
        .ok_or_else(|| ConfigError::MissingScenario {
            section: section.to_string(),
        })
        .and_then(|v| v.as_str().ok_or_else(|| err_type("scenario", "a string")))?;
    let kind: ScenarioKind = kind_name
        .parse()
        .map_err(|_| ConfigError::UnknownScenario {
            section: section.to_string(),
            name: kind_name.to_string(),
        })?;

    let format = match body.get("format") {
        None => OutputFormat::Csv,
        Some(v) => v
            .as_str()
            .ok_or_else(|| err_type("format", "a string"))?
            .parse()
            .map_err(|reason| ConfigError::InvalidValue {
                section: section.to_string(),
                key: "format".into(),
                reason,
            })?,
    };
    let output = match body.get("output") {
        None => PathBuf::from(format!("{section}.{}", format.extension())),
        Some(v) => PathBuf::from(v.as_str().ok_or_else(|| err_type("output", "a string"))?),
    };
    let seed = match body.get("seed") {
        None => 0,
        Some(v) => v
            .as_integer()
            .filter(|i| *i >= 0)
            .ok_or_else(|| err_type("seed", "a non-negative integer"))? as u64,
    };

    let keys = kind.keys();
    for key in body.keys() {
        if !META_KEYS.contains(&key.as_str()) && !keys.iter().any(|k| k.name == key) {
            return Err(ConfigError::UnknownKey {
                section: section.to_string(),
                key: key.clone(),
            });
        }
    }

    let mut params = BTreeMap::new();
    let mut initial = None;
    for key in keys {
        let Some(value) = body.get(key.name) else {
            if key.required {
                return Err(ConfigError::MissingKey {
                    section: section.to_string(),
                    kind,
                    key: key.name,
                });
            }
            continue;
        };
        match key.kind {
            KeyKind::Real => {
                let x = match value {
                    toml::Value::Float(f) => *f,
                    toml::Value::Integer(i) => *i as f64,
                    _ => return Err(err_type(key.name, "a number")),
                };
                if !x.is_finite() {
                    return Err(err_type(key.name, "a finite number"));
                }
                params.insert(key.name.to_string(), x);
            }
            KeyKind::Count => {
                let n = value
                    .as_integer()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| err_type(key.name, "a positive integer"))?;
                params.insert(key.name.to_string(), n as f64);
            }
            KeyKind::State => {
                let s = value
                    .as_str()
                    .ok_or_else(|| err_type(key.name, "a string"))?;
                initial = Some(match s {
                    "ground" => InitialState::Ground,
                    "excited" => InitialState::Excited,
                    "plus" => InitialState::Plus,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            section: section.to_string(),
                            key: key.name.into(),
                            reason: format!("`{other}` is not one of ground, excited, plus"),
                        })
                    }
                });
            }
        }
    }

    let mut cfg = ScenarioConfig {
        name: section.to_string(),
        kind,
        params,
        initial,
        output,
        format,
        seed,
    };
    apply_defaults(&mut cfg).map_err(|(key, reason)| ConfigError::InvalidValue {
        section: section.to_string(),
        key: key.to_string(),
        reason,
    })?;
    Ok(cfg)
}

type Invalid = (&'static str, String);

fn positive(cfg: &ScenarioConfig, key: &'static str) -> Result<f64, Invalid> {
    match cfg.get(key) {
        Some(x) if x > 0.0 => Ok(x),
        Some(x) => Err((key, format!("must be > 0, got {x}"))),
        None => Err((key, "missing".into())),
    }
}

fn non_negative(cfg: &ScenarioConfig, key: &'static str) -> Result<f64, Invalid> {
    match cfg.get(key) {
        Some(x) if x >= 0.0 => Ok(x),
        Some(x) => Err((key, format!("must be >= 0, got {x}"))),
        None => Err((key, "missing".into())),
    }
}

fn default(cfg: &mut ScenarioConfig, key: &str, value: f64) {
    cfg.params.entry(key.to_string()).or_insert(value);
}

/// Fills defaults (`gamma = 1`, `step = min(dt, 1e-3 / gamma)`, ...) and
/// checks value ranges.
fn apply_defaults(cfg: &mut ScenarioConfig) -> Result<(), Invalid> {
    default(cfg, "gamma", 1.0);
    let gamma = positive(cfg, "gamma")?;
    let fine_step = 1e-3 / gamma;
    match cfg.kind {
        ScenarioKind::CoherentDrive => {
            non_negative(cfg, "kappa_over_gamma")?;
            non_negative(cfg, "rabi")?;
            non_negative(cfg, "t_final")?;
            default(cfg, "extra_decay", 0.0);
            non_negative(cfg, "extra_decay")?;
            default(cfg, "step", fine_step);
            positive(cfg, "step")?;
            default(cfg, "sample_every", 1.0);
            cfg.initial.get_or_insert(InitialState::Ground);
        }
        ScenarioKind::SinglePhoton => {
            let ratio = non_negative(cfg, "kappa_over_gamma")?;
            if ratio > 1.0 {
                return Err((
                    "kappa_over_gamma",
                    format!("{ratio} > 1: beam decay cannot exceed total decay"),
                ));
            }
            let gamma_tau = positive(cfg, "gamma_tau")?;
            default(cfg, "t_final", 2.0 * gamma_tau / gamma);
            non_negative(cfg, "t_final")?;
            default(cfg, "sample_every", 10.0);
        }
        ScenarioKind::FockPulse => {
            positive(cfg, "kappa_over_gamma")?;
            let gamma_tau = positive(cfg, "gamma_tau")?;
            default(cfg, "t_final", gamma_tau / gamma);
            non_negative(cfg, "t_final")?;
            default(cfg, "samples", 1000.0);
            default(cfg, "max_gamma_tau", crate::fock::DEFAULT_MAX_GAMMA_TAU);
            positive(cfg, "max_gamma_tau")?;
        }
        ScenarioKind::Faraday => {
            let kappa = non_negative(cfg, "kappa")?;
            non_negative(cfg, "t_final")?;
            match (cfg.get("chi"), cfg.get("alpha_sq")) {
                (None, None) => default(cfg, "step", fine_step),
                (Some(chi), Some(_)) => {
                    let a2 = positive(cfg, "alpha_sq")?;
                    if chi == 0.0 || kappa == 0.0 {
                        return Err(("chi", "slice mode needs nonzero chi and kappa".into()));
                    }
                    let dt = a2 * chi.sin().powi(2) / kappa;
                    cfg.params.insert("dt".into(), dt);
                    default(cfg, "step", dt.min(fine_step));
                }
                (Some(_), None) => return Err(("alpha_sq", "required together with chi".into())),
                (None, Some(_)) => return Err(("chi", "required together with alpha_sq".into())),
            }
            positive(cfg, "step")?;
            default(cfg, "sample_every", 1.0);
            cfg.initial.get_or_insert(InitialState::Plus);
        }
        ScenarioKind::OracleCompare => {
            positive(cfg, "kappa_over_gamma")?;
            non_negative(cfg, "alpha_sq")?;
            let kdt = positive(cfg, "kappa_dt")?;
            let kappa = gamma * cfg.param("kappa_over_gamma");
            cfg.params.insert("dt".into(), kdt / kappa);
            default(cfg, "sample_every", 1.0);
            cfg.initial.get_or_insert(InitialState::Ground);
        }
    }
    Ok(())
}
