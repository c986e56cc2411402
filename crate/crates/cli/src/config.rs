//! Run configuration: a TOML file parsed into raw tables, then validated
//! into model types. Every rejection names the offending field.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spinreduce::dynamics::IntegratorSpec;
use spinreduce::model::{check_interior, Coefficients, MLState, ModelParams, ReducedState, SublatticeParams, Vec3};
use spinreduce::transforms::ml_to_reduced;
use spinreduce::Error as ModelError;

/// Relative tolerance for integrals given both in `[params]` and implied by
/// an `(m, l)` initial state.
const INTEGRAL_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// Dotted field path, or the file name for whole-file failures.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Svg,
    JsonLines,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    exchange_l: f64,
    exchange_m: f64,
    anisotropy_l: f64,
    anisotropy_m: f64,
    dzyaloshinsky: f64,
    quartic: f64,
    g_norm: Option<f64>,
    h_norm: Option<f64>,
    p_v: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReduced {
    u: f64,
    p_u: f64,
    v: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMl {
    m: [f64; 3],
    l: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    reduced: Option<RawReduced>,
    ml: Option<RawMl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitConfig {
    /// Newton seeds per axis.
    pub grid_n: usize,
    /// Contouring grid for the background level curves.
    pub resolution: usize,
    pub u_periods_to_render: usize,
    /// Number of background level curves.
    pub level_count: usize,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self {
            grid_n: 64,
            resolution: 200,
            u_periods_to_render: 1,
            level_count: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    /// Also write the lifted `(m, l)` trajectory of a reduced run.
    pub lift: bool,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg, Format::JsonLines],
            lift: true,
        }
    }
}

impl OutputsConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Negates the Dzyaloshinsky coefficient of the full-system oracle.
    /// Test hook: the reduction-equivalence check must then fail.
    pub broken_sign: bool,
    /// Random states per sampled check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            broken_sign: false,
            samples: 1000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: RawParams,
    sublattice_params: Option<SublatticeParams>,
    initial: Option<RawInitial>,
    #[serde(default)]
    integrator: IntegratorSpec,
    #[serde(default)]
    portrait: PortraitConfig,
    #[serde(default)]
    outputs: OutputsConfig,
    #[serde(default)]
    check: CheckConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    Reduced(ReducedState),
    Ml(MLState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub sublattice_params: Option<SublatticeParams>,
    pub initial: Option<Initial>,
    pub integrator: IntegratorSpec,
    pub portrait: PortraitConfig,
    pub outputs: OutputsConfig,
    pub check: CheckConfig,
}

impl RunConfig {
    /// Initial state in reduced form with `v` set (0 when not given).
    pub fn initial_reduced(&self) -> Option<ReducedState> {
        match self.initial? {
            Initial::Reduced(r) => Some(ReducedState::with_v(r.u, r.p_u, r.v.unwrap_or(0.0))),
            Initial::Ml(st) => {
                let r = ml_to_reduced(&st).ok()?.state;
                Some(ReducedState::with_v(r.u, r.p_u, r.v.unwrap_or(0.0)))
            }
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read config: {e}")))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| ConfigError::new("config", one_line(&e.to_string())))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "config".to_string() } else { path };
        ConfigError::new(path, one_line(&e.inner().to_string()))
    })?;
    validate(raw)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn finite(path: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::new(path, format!("must be finite, got {x}")))
    }
}

fn model_error(e: ModelError) -> ConfigError {
    match e {
        ModelError::InvalidParam { name, reason } => ConfigError::new(format!("params.{name}"), reason),
        other => ConfigError::new("params", other.to_string()),
    }
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let rp = &raw.params;
    let coeffs = Coefficients {
        exchange_l: finite("params.exchange_l", rp.exchange_l)?,
        exchange_m: finite("params.exchange_m", rp.exchange_m)?,
        anisotropy_l: finite("params.anisotropy_l", rp.anisotropy_l)?,
        anisotropy_m: finite("params.anisotropy_m", rp.anisotropy_m)?,
        dzyaloshinsky: finite("params.dzyaloshinsky", rp.dzyaloshinsky)?,
        quartic: finite("params.quartic", rp.quartic)?,
    };

    let initial = match &raw.initial {
        None => None,
        Some(RawInitial {
            reduced: Some(_),
            ml: Some(_),
        }) => return Err(ConfigError::new("initial", "give exactly one of `reduced` or `ml`, not both")),
        Some(RawInitial {
            reduced: None,
            ml: None,
        }) => return Err(ConfigError::new("initial", "give exactly one of `reduced` or `ml`")),
        Some(RawInitial { reduced: Some(r), .. }) => {
            finite("initial.reduced.u", r.u)?;
            finite("initial.reduced.p_u", r.p_u)?;
            if let Some(v) = r.v {
                finite("initial.reduced.v", v)?;
            }
            Some(Initial::Reduced(ReducedState {
                u: r.u,
                p_u: r.p_u,
                v: r.v,
            }))
        }
        Some(RawInitial { ml: Some(s), .. }) => {
            for (k, x) in s.m.iter().enumerate() {
                finite(&format!("initial.ml.m[{k}]"), *x)?;
            }
            for (k, x) in s.l.iter().enumerate() {
                finite(&format!("initial.ml.l[{k}]"), *x)?;
            }
            Some(Initial::Ml(MLState::new(Vec3::from(s.m), Vec3::from(s.l))))
        }
    };

    // Integrals: from [params], or implied by an (m, l) initial state.
    let implied = match initial {
        Some(Initial::Ml(st)) => {
            let r = ml_to_reduced(&st).map_err(|e| ConfigError::new("initial.ml", e.to_string()))?;
            Some([r.g_norm, r.h_norm, r.p_v])
        }
        _ => None,
    };
    let given = [("g_norm", rp.g_norm), ("h_norm", rp.h_norm), ("p_v", rp.p_v)];
    let mut integrals = [0.0; 3];
    for (k, (name, value)) in given.iter().enumerate() {
        let path = format!("params.{name}");
        integrals[k] = match (value, implied) {
            (Some(v), Some(imp)) => {
                let v = finite(&path, *v)?;
                if (v - imp[k]).abs() > INTEGRAL_MATCH_TOL * imp[k].abs().max(1.0) {
                    return Err(ConfigError::new(
                        path,
                        format!("{v} disagrees with the value {} implied by initial.ml", imp[k]),
                    ));
                }
                v
            }
            (Some(v), None) => finite(&path, *v)?,
            (None, Some(imp)) => imp[k],
            (None, None) => {
                return Err(ConfigError::new(path, "required unless the initial state is given as `ml`"));
            }
        };
    }
    let params = ModelParams::new(coeffs, integrals[0], integrals[1], integrals[2]).map_err(model_error)?;

    if let Some(Initial::Reduced(r)) = initial {
        check_interior(&params, r.p_u).map_err(|e| ConfigError::new("initial.reduced.p_u", e.to_string()))?;
    }

    raw.integrator
        .validate()
        .map_err(|e| ConfigError::new("integrator", e.to_string()))?;

    let pc = raw.portrait;
    if pc.grid_n == 0 {
        return Err(ConfigError::new("portrait.grid_n", "must be at least 1"));
    }
    if pc.resolution < 2 {
        return Err(ConfigError::new("portrait.resolution", "must be at least 2"));
    }
    if pc.u_periods_to_render == 0 {
        return Err(ConfigError::new("portrait.u_periods_to_render", "must be at least 1"));
    }
    if raw.check.samples == 0 {
        return Err(ConfigError::new("check.samples", "must be at least 1"));
    }
    if raw.outputs.directory.as_os_str().is_empty() {
        return Err(ConfigError::new("outputs.directory", "must not be empty"));
    }

    Ok(RunConfig {
        params,
        sublattice_params: raw.sublattice_params,
        initial,
        integrator: raw.integrator,
        portrait: pc,
        outputs: raw.outputs,
        check: raw.check,
    })
}
