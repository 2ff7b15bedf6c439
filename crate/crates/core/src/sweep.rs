//! One- and two-parameter sweeps over analytic and Monte Carlo SOPs, with CSV
//! output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::analytic::{sop, sop_checked, SecrecyResult};
use crate::mc::{estimate_sop, McEstimate};
use crate::model::{EveLayout, Power, Scenario, SystemConfig};
use crate::quadrature::QuadratureSpec;

/// A compare-mode point is flagged when |analytic − MC| exceeds 3·SE plus this.
pub const FLAG_ABS_TOL: f64 = 5e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("unknown sweep parameter '{0}'")]
    UnknownParam(String),
    #[error("axis '{0}' has no values")]
    EmptyAxis(String),
    #[error("at most two sweep axes are supported, got {0}")]
    TooManyAxes(usize),
    #[error("parameter '{param}' needs a nonnegative integer, got {value}")]
    NotInteger { param: Param, value: f64 },
    #[error("unknown {what} '{value}'")]
    UnknownOption { what: &'static str, value: String },
    #[error("τ grid step {0} is too coarse or does not divide 1 (need 1/step an integer ≥ 9)")]
    CoarseGrid(f64),
    #[error("every grid point failed to evaluate")]
    NoValidPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Mc,
    Compare,
}

impl FromStr for Mode {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "mc" => Ok(Mode::Mc),
            "compare" => Ok(Mode::Compare),
            _ => Err(SweepError::UnknownOption { what: "mode", value: s.into() }),
        }
    }
}

/// How the power split is completed after the swept values are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    /// Splits are taken as given.
    #[default]
    Free,
    /// τ_c = 1 − τ_1 − τ_2.
    FillCommon,
    /// τ_1 = τ_2 = (1 − τ_c)/2.
    EqualPrivate,
}

impl FromStr for TauRule {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(TauRule::Free),
            "fill_common" => Ok(TauRule::FillCommon),
            "equal_private" => Ok(TauRule::EqualPrivate),
            _ => Err(SweepError::UnknownOption { what: "tau_rule", value: s.into() }),
        }
    }
}

/// Where the eavesdropper overlap counts come from at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveCounts {
    /// [`EveLayout::from_caption`] for the point's configuration.
    Caption,
    Fixed { l_ec: u32, l_e1: u32, l_e2: u32 },
}

impl EveCounts {
    pub fn layout(&self, scenario: Scenario, cfg: &SystemConfig) -> EveLayout {
        match *self {
            EveCounts::Caption => EveLayout::from_caption(scenario, cfg),
            EveCounts::Fixed { l_ec, l_e1, l_e2 } => EveLayout::new(scenario, l_ec, l_e1, l_e2),
        }
    }
}

/// Sweepable parameters; names match the config-file keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    NAntennas,
    NPaths,
    NCommonPaths,
    PathlossExponent,
    CarrierFreqGhz,
    NoisePowerDbm,
    TxPowerDbm,
    TauC,
    Tau1,
    Tau2,
    R1,
    R2,
    RE,
    RateThCommon,
    RateThPrivate,
    LEc,
    LE1,
    LE2,
}

impl Param {
    pub const ALL: [Param; 18] = [
        Param::NAntennas,
        Param::NPaths,
        Param::NCommonPaths,
        Param::PathlossExponent,
        Param::CarrierFreqGhz,
        Param::NoisePowerDbm,
        Param::TxPowerDbm,
        Param::TauC,
        Param::Tau1,
        Param::Tau2,
        Param::R1,
        Param::R2,
        Param::RE,
        Param::RateThCommon,
        Param::RateThPrivate,
        Param::LEc,
        Param::LE1,
        Param::LE2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::NAntennas => "n_antennas",
            Param::NPaths => "n_paths",
            Param::NCommonPaths => "n_common_paths",
            Param::PathlossExponent => "pathloss_exponent",
            Param::CarrierFreqGhz => "carrier_freq_ghz",
            Param::NoisePowerDbm => "noise_power_dbm",
            Param::TxPowerDbm => "tx_power_dbm",
            Param::TauC => "tau_c",
            Param::Tau1 => "tau_1",
            Param::Tau2 => "tau_2",
            Param::R1 => "r_1",
            Param::R2 => "r_2",
            Param::RE => "r_e",
            Param::RateThCommon => "rate_th_common",
            Param::RateThPrivate => "rate_th_private",
            Param::LEc => "l_ec",
            Param::LE1 => "l_e1",
            Param::LE2 => "l_e2",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Param::NAntennas | Param::NPaths | Param::NCommonPaths | Param::LEc | Param::LE1 | Param::LE2)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| SweepError::UnknownParam(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: Param, values: Vec<f64>) -> Result<Self, SweepError> {
        if values.is_empty() {
            return Err(SweepError::EmptyAxis(param.name().into()));
        }
        if param.is_integer() {
            if let Some(&value) = values.iter().find(|v| !(v.fract() == 0.0 && **v >= 0.0 && **v <= u32::MAX as f64)) {
                return Err(SweepError::NotInteger { param, value });
            }
        }
        Ok(Self { param, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Zero, one or two axes; zero evaluates the base point once.
    pub axes: Vec<Axis>,
    pub mode: Mode,
    pub scenario: Scenario,
    pub n_trials: u64,
    pub seed: u64,
    pub quad: QuadratureSpec,
    pub tau_rule: TauRule,
    pub eve_counts: EveCounts,
    /// Re-evaluate Scenarios II/III at doubled orders to fill `converged`.
    pub check_convergence: bool,
}

impl SweepSpec {
    pub fn new(scenario: Scenario, mode: Mode) -> Self {
        Self {
            axes: Vec::new(),
            mode,
            scenario,
            n_trials: 1_000_000,
            seed: 1,
            quad: QuadratureSpec::default(),
            tau_rule: TauRule::Free,
            eve_counts: EveCounts::Caption,
            check_convergence: true,
        }
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.len() > 2 {
            return Err(SweepError::TooManyAxes(self.axes.len()));
        }
        Ok(())
    }

    /// Grid points in axis-major order (the first axis varies slowest).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        self.axes.iter().fold(vec![Vec::new()], |acc, axis| {
            acc.into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect()
        })
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of grid point `index`: the (index+1)-th SplitMix64 output from state `seed`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Builds the configuration and eavesdropper layout of one grid point.
pub fn apply_point(
    base: &SystemConfig,
    spec: &SweepSpec,
    values: &[f64],
) -> (SystemConfig, EveLayout) {
    let mut cfg = base.clone();
    let mut eve_override = [None; 3];
    for (axis, &v) in spec.axes.iter().zip(values) {
        let n = v as u32;
        match axis.param {
            Param::NAntennas => cfg.n_antennas = n,
            Param::NPaths => cfg.n_paths = n,
            Param::NCommonPaths => cfg.n_common_paths = n,
            Param::PathlossExponent => cfg.pathloss_exponent = v,
            Param::CarrierFreqGhz => cfg.carrier_freq_ghz = v,
            Param::NoisePowerDbm => cfg.noise_power = Power::from_dbm(v),
            Param::TxPowerDbm => cfg.tx_power = Power::from_dbm(v),
            Param::TauC => cfg.tau_c = v,
            Param::Tau1 => cfg.tau_1 = v,
            Param::Tau2 => cfg.tau_2 = v,
            Param::R1 => cfg.r_1 = v,
            Param::R2 => cfg.r_2 = v,
            Param::RE => cfg.r_e = v,
            Param::RateThCommon => cfg.rate_th_common = v,
            Param::RateThPrivate => cfg.rate_th_private = v,
            Param::LEc => eve_override[0] = Some(n),
            Param::LE1 => eve_override[1] = Some(n),
            Param::LE2 => eve_override[2] = Some(n),
        }
    }
    match spec.tau_rule {
        TauRule::Free => {}
        TauRule::FillCommon => {
            let rest = 1.0 - cfg.tau_1 - cfg.tau_2;
            // absorb rounding so an exact fill does not read as negative
            cfg.tau_c = if rest > -1e-12 { rest.max(0.0) } else { rest };
        }
        TauRule::EqualPrivate => {
            cfg.tau_1 = (1.0 - cfg.tau_c) / 2.0;
            cfg.tau_2 = cfg.tau_1;
        }
    }
    let mut eve = spec.eve_counts.layout(spec.scenario, &cfg);
    let [ec, e1, e2] = eve_override;
    eve.l_ec = ec.unwrap_or(eve.l_ec);
    eve.l_e1 = e1.unwrap_or(eve.l_e1);
    eve.l_e2 = e2.unwrap_or(eve.l_e2);
    (cfg, eve)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub analytic: Option<SecrecyResult>,
    pub mc: Option<McEstimate>,
    /// Compare mode only: |analytic − MC| > 3·SE + [`FLAG_ABS_TOL`].
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    /// Error message for points that could not be evaluated.
    pub outcome: Result<PointResult, String>,
}

impl SweepRow {
    pub fn is_error(&self) -> bool {
        self.outcome.is_err()
    }

    pub fn is_flagged(&self) -> bool {
        matches!(&self.outcome, Ok(p) if p.flagged)
    }
}

/// Evaluates one configuration in the given mode.
pub fn evaluate_point(
    cfg: &SystemConfig,
    eve: &EveLayout,
    spec: &SweepSpec,
    seed: u64,
) -> Result<PointResult, String> {
    let analytic = match spec.mode {
        Mode::Mc => None,
        Mode::Analytic | Mode::Compare => {
            let r = if spec.check_convergence { sop_checked(cfg, eve, &spec.quad) } else { sop(cfg, eve, &spec.quad) };
            Some(r.map_err(|e| e.to_string())?)
        }
    };
    let mc = match spec.mode {
        Mode::Analytic => None,
        Mode::Mc | Mode::Compare => Some(estimate_sop(cfg, eve, spec.n_trials, seed).map_err(|e| e.to_string())?),
    };
    let flagged = match (&analytic, &mc) {
        (Some(a), Some(m)) => (a.sop - m.sop_hat).abs() > 3.0 * m.std_err + FLAG_ABS_TOL,
        _ => false,
    };
    Ok(PointResult { analytic, mc, flagged })
}

/// Evaluates every grid point (in parallel) and returns rows in grid order.
/// Invalid points become error rows.
pub fn run_sweep(spec: &SweepSpec, base: &SystemConfig) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    Ok(grid
        .into_par_iter()
        .enumerate()
        .map(|(i, values)| {
            let (cfg, eve) = apply_point(base, spec, &values);
            let outcome = evaluate_point(&cfg, &eve, spec, point_seed(spec.seed, i as u64));
            SweepRow { values, outcome }
        })
        .collect())
}

/// Nine significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_axis(param: Param, v: f64) -> String {
    if param.is_integer() {
        format!("{}", v as u64)
    } else {
        fmt_float(v)
    }
}

/// Column names of the result part of a row, by mode.
pub fn result_columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Analytic => &["sop_analytic", "scp_analytic", "converged", "status"],
        Mode::Mc => &["sop_mc", "std_err", "n_trials", "status"],
        Mode::Compare => &["sop_analytic", "sop_mc", "std_err", "abs_diff", "flagged", "converged", "status"],
    }
}

fn result_fields(mode: Mode, outcome: &Result<PointResult, String>) -> Vec<String> {
    let p = match outcome {
        Err(msg) => {
            let mut v = vec![String::new(); result_columns(mode).len() - 1];
            v.push(format!("error: {msg}"));
            return v;
        }
        Ok(p) => p,
    };
    let status = if p.flagged { "flagged" } else { "ok" }.to_string();
    match (mode, &p.analytic, &p.mc) {
        (Mode::Analytic, Some(a), _) => vec![fmt_float(a.sop), fmt_float(a.scp), a.converged.to_string(), status],
        (Mode::Mc, _, Some(m)) => vec![fmt_float(m.sop_hat), fmt_float(m.std_err), m.n_trials.to_string(), status],
        (Mode::Compare, Some(a), Some(m)) => vec![
            fmt_float(a.sop),
            fmt_float(m.sop_hat),
            fmt_float(m.std_err),
            fmt_float((a.sop - m.sop_hat).abs()),
            p.flagged.to_string(),
            a.converged.to_string(),
            status,
        ],
        _ => unreachable!("evaluate_point fills the fields its mode needs"),
    }
}

/// Writes the header and one record per row.
pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = spec
        .axes
        .iter()
        .map(|a| a.param.name())
        .chain(["scenario"])
        .chain(result_columns(spec.mode).iter().copied())
        .collect();
    w.write_record(&header)?;
    for row in rows {
        let record: Vec<String> = spec
            .axes
            .iter()
            .zip(&row.values)
            .map(|(a, &v)| fmt_axis(a.param, v))
            .chain([spec.scenario.to_string()])
            .chain(result_fields(spec.mode, &row.outcome))
            .collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
