//! Flat TOML run files: one top-level key per field of the system
//! configuration, eavesdropper layout, quadrature orders and sweep settings.
//!
//! Every key is optional; missing system fields take [`SystemConfig::default`]
//! values. Powers are given in dBm (`tx_power_dbm`, `noise_power_dbm`).
//! Unknown keys are rejected.
//!
//! ```toml
//! scenario = "II"
//! tx_power_dbm = 10.0
//! r_e = 25.0
//! axis_1 = "tau_c"
//! values_1 = [0.1, 0.2, 0.3]
//! tau_rule = "equal_private"
//! mode = "compare"
//! n_trials = 1000000
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::model::{ConfigError, EveLayout, Power, Scenario, SystemConfig};
use crate::noma::DEFAULT_STEP;
use crate::quadrature::{BRule, LambdaRule, QuadError, QuadratureSpec};
use crate::sweep::{Axis, EveCounts, Mode, Param, SweepError, SweepSpec, TauRule};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EveCountsKind {
    Caption,
    Fixed,
}

/// Raw file contents; see the module docs.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n_antennas: Option<u32>,
    pub n_paths: Option<u32>,
    pub n_common_paths: Option<u32>,
    pub pathloss_exponent: Option<f64>,
    pub carrier_freq_ghz: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    pub tau_c: Option<f64>,
    pub tau_1: Option<f64>,
    pub tau_2: Option<f64>,
    pub r_1: Option<f64>,
    pub r_2: Option<f64>,
    pub r_e: Option<f64>,
    pub rate_th_common: Option<f64>,
    pub rate_th_private: Option<f64>,

    pub scenario: Option<String>,
    pub l_ec: Option<u32>,
    pub l_e1: Option<u32>,
    pub l_e2: Option<u32>,
    eve_counts: Option<EveCountsKind>,

    pub order_i: Option<usize>,
    pub order_n: Option<usize>,
    pub order_k: Option<usize>,
    pub order_v: Option<usize>,
    pub order_d: Option<usize>,
    pub lambda_rule: Option<LambdaRule>,
    pub b_rule: Option<BRule>,

    pub axis_1: Option<String>,
    pub values_1: Option<Vec<f64>>,
    pub axis_2: Option<String>,
    pub values_2: Option<Vec<f64>>,
    pub mode: Option<Mode>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub tau_rule: Option<TauRule>,
    pub check_convergence: Option<bool>,
    pub tau_step: Option<f64>,
}

/// Everything a run needs, after defaults and validation of the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub eve_counts: EveCounts,
    pub sweep: SweepSpec,
    /// Simplex step of the NOMA comparison.
    pub tau_step: f64,
}

impl RunConfig {
    pub fn scenario(&self) -> Scenario {
        self.sweep.scenario
    }

    /// Eavesdropper layout at the base configuration.
    pub fn eve(&self) -> EveLayout {
        self.eve_counts.layout(self.sweep.scenario, &self.system)
    }
}

impl RawConfig {
    pub fn resolve(self) -> Result<RunConfig, LoadError> {
        let d = SystemConfig::default();
        let system = SystemConfig {
            n_antennas: self.n_antennas.unwrap_or(d.n_antennas),
            n_paths: self.n_paths.unwrap_or(d.n_paths),
            n_common_paths: self.n_common_paths.unwrap_or(d.n_common_paths),
            pathloss_exponent: self.pathloss_exponent.unwrap_or(d.pathloss_exponent),
            carrier_freq_ghz: self.carrier_freq_ghz.unwrap_or(d.carrier_freq_ghz),
            noise_power: self.noise_power_dbm.map_or(d.noise_power, Power::from_dbm),
            tx_power: self.tx_power_dbm.map_or(d.tx_power, Power::from_dbm),
            tau_c: self.tau_c.unwrap_or(d.tau_c),
            tau_1: self.tau_1.unwrap_or(d.tau_1),
            tau_2: self.tau_2.unwrap_or(d.tau_2),
            r_1: self.r_1.unwrap_or(d.r_1),
            r_2: self.r_2.unwrap_or(d.r_2),
            r_e: self.r_e.unwrap_or(d.r_e),
            rate_th_common: self.rate_th_common.unwrap_or(d.rate_th_common),
            rate_th_private: self.rate_th_private.unwrap_or(d.rate_th_private),
        };
        let scenario: Scenario = self.scenario.as_deref().unwrap_or("I").parse()?;

        let any_count = self.l_ec.is_some() || self.l_e1.is_some() || self.l_e2.is_some();
        let eve_counts = match self.eve_counts {
            Some(EveCountsKind::Caption) if any_count => {
                return Err(LoadError::Invalid("eve_counts = \"caption\" conflicts with explicit l_ec/l_e1/l_e2".into()))
            }
            Some(EveCountsKind::Caption) | None if !any_count => EveCounts::Caption,
            _ => {
                // missing counts fall back to the caption values of the base point
                let cap = EveLayout::from_caption(scenario, &system);
                EveCounts::Fixed {
                    l_ec: self.l_ec.unwrap_or(cap.l_ec),
                    l_e1: self.l_e1.unwrap_or(cap.l_e1),
                    l_e2: self.l_e2.unwrap_or(cap.l_e2),
                }
            }
        };

        let mut quad = QuadratureSpec::default();
        quad.lambda_rule = self.lambda_rule.unwrap_or(quad.lambda_rule);
        quad.b_rule = self.b_rule.unwrap_or(quad.b_rule);
        for (slot, v) in [
            (&mut quad.order_i, self.order_i),
            (&mut quad.order_n, self.order_n),
            (&mut quad.order_k, self.order_k),
            (&mut quad.order_v, self.order_v),
            (&mut quad.order_d, self.order_d),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        quad.validate()?;

        let mut sweep = SweepSpec::new(scenario, self.mode.unwrap_or(Mode::Analytic));
        for (name, values, key) in [(self.axis_1, self.values_1, "1"), (self.axis_2, self.values_2, "2")] {
            match (name, values) {
                (Some(n), Some(v)) => sweep.axes.push(Axis::new(n.parse::<Param>()?, v)?),
                (None, None) => {}
                _ => return Err(LoadError::Invalid(format!("axis_{key} and values_{key} must be given together"))),
            }
        }
        sweep.n_trials = self.n_trials.unwrap_or(sweep.n_trials);
        sweep.seed = self.seed.unwrap_or(sweep.seed);
        sweep.quad = quad;
        sweep.tau_rule = self.tau_rule.unwrap_or_default();
        sweep.eve_counts = eve_counts;
        sweep.check_convergence = self.check_convergence.unwrap_or(sweep.check_convergence);
        sweep.validate()?;

        Ok(RunConfig { system, eve_counts, sweep, tau_step: self.tau_step.unwrap_or(DEFAULT_STEP) })
    }
}

pub fn parse_str(text: &str) -> Result<RunConfig, LoadError> {
    toml::from_str::<RawConfig>(text)?.resolve()
}

pub fn load(path: &Path) -> Result<RunConfig, LoadError> {
    load_with_overrides(Some(path), &[])
}

/// Reads `path` (or starts from an empty file) and applies `key=value`
/// overrides on top. Values are TOML literals; anything that does not parse
/// as one is taken as a string, so `scenario=III` works unquoted.
pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, LoadError> {
    let text = match path {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|source| LoadError::Io { path: p.display().to_string(), source })?
        }
        None => String::new(),
    };
    let mut table: toml::Table = toml::from_str(&text)?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| LoadError::Invalid(format!("override '{item}' is not of the form key=value")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        table.insert(key.trim().to_string(), value);
    }
    toml::Value::Table(table).try_into::<RawConfig>()?.resolve()
}
