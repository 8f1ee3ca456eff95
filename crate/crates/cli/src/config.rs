//! Experiment configuration: a sectioned TOML file, `--set` overrides and the
//! embedded presets. The grammar is documented in `CONFIG.md`.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spinmeter::asymptotics::RegimeThresholds;
use spinmeter::units::PhysicalParams;
use spinmeter::{Mass, Spinor, C64};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SpinTrace,
    DensityProfile,
    RegimeSweep,
    Feasibility,
    KernelTable,
    PathOracle,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::SpinTrace => "spin-trace",
            Experiment::DensityProfile => "density-profile",
            Experiment::RegimeSweep => "regime-sweep",
            Experiment::Feasibility => "feasibility",
            Experiment::KernelTable => "kernel-table",
            Experiment::PathOracle => "path-oracle",
        }
    }

    pub fn file_stem(&self) -> &'static str {
        match self {
            Experiment::SpinTrace => "spin_trace",
            Experiment::DensityProfile => "density_profile",
            Experiment::RegimeSweep => "regime_sweep",
            Experiment::Feasibility => "feasibility",
            Experiment::KernelTable => "kernel_table",
            Experiment::PathOracle => "path_oracle",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `mass = 3.5` or `mass = "infinite"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassSpec {
    Finite(f64),
    Named(String),
}

impl Default for MassSpec {
    fn default() -> Self {
        MassSpec::Named("infinite".into())
    }
}

impl MassSpec {
    pub fn resolve(&self) -> Result<Mass, CliError> {
        match self {
            MassSpec::Finite(m) if *m > 0.0 && m.is_finite() => Ok(Mass::Finite(*m)),
            MassSpec::Finite(m) => Err(CliError::config(format!("params.mass must be positive, got {m}"))),
            MassSpec::Named(s) if s == "infinite" => Ok(Mass::Infinite),
            MassSpec::Named(s) => Err(CliError::config(format!(
                "params.mass must be a number or \"infinite\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Field angle in radians.
    pub theta: f64,
    pub delta_x: f64,
    #[serde(default)]
    pub mass: MassSpec,
    /// `[re, im]` of the up amplitude.
    #[serde(default = "default_up")]
    pub eta_up: [f64; 2],
    #[serde(default = "default_down")]
    pub eta_down: [f64; 2],
}

fn default_up() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_down() -> [f64; 2] {
    [0.0, 0.0]
}

impl Params {
    pub fn eta_in(&self) -> Result<Spinor, CliError> {
        Spinor::pure(
            C64::new(self.eta_up[0], self.eta_up[1]),
            C64::new(self.eta_down[0], self.eta_down[1]),
        )
        .map_err(|e| CliError::config(format!("params.eta_up / params.eta_down: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub times: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub n_times: Option<usize>,
}

impl TimeSpec {
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let times = match (&self.times, self.t_max, self.n_times) {
            (Some(ts), None, None) => ts.clone(),
            (None, Some(t_max), Some(n)) => {
                if n < 2 {
                    return Err(CliError::config("time.n_times must be at least 2"));
                }
                if !(t_max.is_finite() && t_max > 0.0) {
                    return Err(CliError::config(format!("time.t_max must be positive, got {t_max}")));
                }
                // integer multiples keep the samples reproducible bit for bit
                (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
            }
            _ => {
                return Err(CliError::config(
                    "time: give either `times` or both `t_max` and `n_times`",
                ))
            }
        };
        if times.is_empty() {
            return Err(CliError::config("time.times is empty"));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::config("time.times must be non-negative and ascending"));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub t: f64,
    /// Optional window of emitted rows.
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub delta_x: Vec<f64>,
    pub theta: Vec<f64>,
    /// Length of the simulated spin trace per point.
    pub t_max: f64,
    /// Sampling step of the trace.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub t: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub t: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Option<Params>,
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    pub density: Option<DensitySpec>,
    pub sweep: Option<SweepSpec>,
    pub kernel: Option<KernelSpec>,
    pub path: Option<PathSpec>,
    pub physical: Option<PhysicalParams>,
    pub thresholds: Option<RegimeThresholds>,
}

impl ExperimentConfig {
    /// Parses `text`, applies `key=value` overrides and validates that the
    /// sections the experiment needs are present.
    pub fn load(text: &str, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
        // parsing the text first keeps line numbers in error messages
        let mut table: Table = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        let _: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: ExperimentConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(format!("after --set overrides: {}", e.message())))?;
        cfg.validate()?;
        // record the defaults actually used
        match cfg.experiment {
            Experiment::DensityProfile | Experiment::RegimeSweep => {
                cfg.thresholds.get_or_insert_with(RegimeThresholds::default);
            }
            Experiment::Feasibility => {
                cfg.physical.get_or_insert_with(PhysicalParams::rb87);
            }
            _ => {}
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let need = |ok: bool, section: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::config(format!(
                    "experiment `{}` needs a [{section}] section",
                    self.experiment
                )))
            }
        };
        match self.experiment {
            Experiment::SpinTrace => {
                need(self.params.is_some(), "params")?;
                need(self.time.is_some(), "time")?;
            }
            Experiment::DensityProfile => {
                need(self.params.is_some(), "params")?;
                need(self.density.is_some(), "density")?;
            }
            Experiment::RegimeSweep => {
                need(self.sweep.is_some(), "sweep")?;
                let s = self.sweep.as_ref().unwrap();
                if s.delta_x.is_empty() || s.theta.is_empty() {
                    return Err(CliError::config("sweep.delta_x and sweep.theta must be non-empty"));
                }
                if !(s.dt > 0.0 && s.t_max > s.dt) {
                    return Err(CliError::config("sweep needs 0 < dt < t_max"));
                }
            }
            Experiment::Feasibility => {}
            Experiment::KernelTable => {
                need(self.params.is_some(), "params")?;
                need(self.kernel.is_some(), "kernel")?;
                let k = self.kernel.as_ref().unwrap();
                if k.n_points < 2 || !(k.x_min < k.x_max) {
                    return Err(CliError::config("kernel needs x_min < x_max and n_points >= 2"));
                }
            }
            Experiment::PathOracle => {
                need(self.params.is_some(), "params")?;
                need(self.path.is_some(), "path")?;
            }
        }
        if let Some(p) = &self.params {
            p.mass.resolve()?;
            p.eta_in()?;
        }
        Ok(())
    }

    pub fn thresholds(&self) -> RegimeThresholds {
        self.thresholds.unwrap_or_default()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

/// `section.key=value`; the value is read as TOML when it parses, else as a
/// string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{spec}`")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::config(format!("--set has an empty key in `{spec}`")));
    }
    let value = parse_value(raw.trim());
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().unwrap();
    let mut node = table;
    for k in keys {
        let entry = node.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set {path}: `{k}` is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Name and TOML text of every embedded preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig2c", include_str!("../presets/fig2c.toml")),
    ("feasibility-rb87", include_str!("../presets/feasibility-rb87.toml")),
    ("sweep", include_str!("../presets/sweep.toml")),
    ("kernel", include_str!("../presets/kernel.toml")),
    ("paths", include_str!("../presets/paths.toml")),
];

pub fn preset(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
        })
}
