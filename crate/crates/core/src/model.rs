//! System configuration, path geometry, link budget and SINRs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be a finite real, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("{field} = {value} lies outside [0, 1]")]
    FractionRange { field: &'static str, value: f64 },
    #[error("power split sums to {0} > 1")]
    TauSum(f64),
    #[error("common path count {common} exceeds path count {paths}")]
    CommonExceedsPaths { common: u32, paths: u32 },
    #[error("{what} must be at least 1")]
    ZeroCount { what: &'static str },
    #[error("{antennas} antennas cannot host two windows of {paths} paths overlapping in {common}")]
    WindowsDoNotFit { antennas: u32, paths: u32, common: u32 },
    #[error("rate threshold {field} must be finite and nonnegative, got {value}")]
    RateThreshold { field: &'static str, value: f64 },
    #[error("eavesdropper counts invalid for scenario {scenario}: {reason}")]
    EveCounts { scenario: Scenario, reason: String },
    #[error("unknown scenario '{0}' (expected I, II, III, IV or 1–4)")]
    UnknownScenario(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("gain {gain} = {value} is nonzero but its path count is 0")]
    ShapeMismatch { gain: &'static str, value: f64 },
    #[error("gain {gain} = {value} is negative or not finite")]
    BadGain { gain: &'static str, value: f64 },
}

/// Power in milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Power(f64);

impl Power {
    pub fn from_dbm(dbm: f64) -> Self {
        Self(10f64.powf(dbm / 10.0))
    }

    pub fn from_mw(mw: f64) -> Self {
        Self(mw)
    }

    pub fn mw(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Eavesdropper position class, determining which of U1's streams leak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Only the private stream is wiretapped.
    I,
    /// The private stream fully, the common stream partly.
    II,
    /// The common stream fully, the private stream partly, with U2's private as interference.
    III,
    /// Only the common stream, with U2's private as interference.
    IV,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::I, Scenario::II, Scenario::III, Scenario::IV];

    pub fn needs_common(self) -> bool {
        !matches!(self, Scenario::I)
    }

    pub fn needs_private(self) -> bool {
        !matches!(self, Scenario::IV)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::I => "I",
            Scenario::II => "II",
            Scenario::III => "III",
            Scenario::IV => "IV",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Scenario::I),
            "II" | "2" => Ok(Scenario::II),
            "III" | "3" => Ok(Scenario::III),
            "IV" | "4" => Ok(Scenario::IV),
            _ => Err(ConfigError::UnknownScenario(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// N_s
    pub n_antennas: u32,
    /// L
    pub n_paths: u32,
    /// L_c
    pub n_common_paths: u32,
    /// α
    pub pathloss_exponent: f64,
    pub carrier_freq_ghz: f64,
    pub noise_power: Power,
    pub tx_power: Power,
    pub tau_c: f64,
    pub tau_1: f64,
    pub tau_2: f64,
    /// Distances in metres.
    pub r_1: f64,
    pub r_2: f64,
    pub r_e: f64,
    /// Secrecy rate thresholds in bit/s/Hz.
    pub rate_th_common: f64,
    pub rate_th_private: f64,
}

impl Default for SystemConfig {
    /// N_s = 50, L = 8, L_c = 4, α = 4.14, f_c = 28 GHz, σ² = −71 dBm, P = 10 dBm,
    /// equal thirds, r_1 = r_2 = 15 m, r_e = 30 m, thresholds 0.1.
    fn default() -> Self {
        Self {
            n_antennas: 50,
            n_paths: 8,
            n_common_paths: 4,
            pathloss_exponent: 4.14,
            carrier_freq_ghz: 28.0,
            noise_power: Power::from_dbm(-71.0),
            tx_power: Power::from_dbm(10.0),
            tau_c: 1.0 / 3.0,
            tau_1: 1.0 / 3.0,
            tau_2: 1.0 / 3.0,
            r_1: 15.0,
            r_2: 15.0,
            r_e: 30.0,
            rate_th_common: 0.1,
            rate_th_private: 0.1,
        }
    }
}

impl SystemConfig {
    /// L_p = L − L_c (saturating, so an invalid config never panics here).
    pub fn n_private_paths(&self) -> u32 {
        self.n_paths.saturating_sub(self.n_common_paths)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_paths == 0 {
            return Err(ConfigError::ZeroCount { what: "path count L" });
        }
        if self.n_common_paths == 0 {
            return Err(ConfigError::ZeroCount { what: "common path count L_c" });
        }
        if self.n_common_paths > self.n_paths {
            return Err(ConfigError::CommonExceedsPaths { common: self.n_common_paths, paths: self.n_paths });
        }
        if self.n_antennas < 2 * self.n_paths - self.n_common_paths {
            return Err(ConfigError::WindowsDoNotFit {
                antennas: self.n_antennas,
                paths: self.n_paths,
                common: self.n_common_paths,
            });
        }
        let positive = [
            ("pathloss_exponent", self.pathloss_exponent),
            ("carrier_freq_ghz", self.carrier_freq_ghz),
            ("noise_power", self.noise_power.mw()),
            ("r_1", self.r_1),
            ("r_2", self.r_2),
            ("r_e", self.r_e),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NonPositive { field, value });
            }
        }
        let tx = self.tx_power.mw();
        if !(tx >= 0.0 && tx.is_finite()) {
            return Err(ConfigError::NonFinite { field: "tx_power", value: tx });
        }
        for (field, value) in [("tau_c", self.tau_c), ("tau_1", self.tau_1), ("tau_2", self.tau_2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::FractionRange { field, value });
            }
        }
        let sum = self.tau_c + self.tau_1 + self.tau_2;
        if sum > 1.0 + 1e-12 {
            return Err(ConfigError::TauSum(sum));
        }
        for (field, value) in [("rate_th_common", self.rate_th_common), ("rate_th_private", self.rate_th_private)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::RateThreshold { field, value });
            }
        }
        Ok(())
    }
}

/// Eavesdropper overlap counts (L_ec, L_e1, L_e2) and scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EveLayout {
    pub scenario: Scenario,
    pub l_ec: u32,
    pub l_e1: u32,
    pub l_e2: u32,
}

impl EveLayout {
    pub fn new(scenario: Scenario, l_ec: u32, l_e1: u32, l_e2: u32) -> Self {
        Self { scenario, l_ec, l_e1, l_e2 }
    }

    /// Counts read off the figure captions, clipped so the layout invariants hold:
    /// I: L_e1 = 2; II: L_ec = 2, L_e1 = L_p; III: L_ec = L_c, L_e1 = 1,
    /// L_e2 = L − L_ec − L_e1; IV: L_ec = 2, L_e2 = L − L_ec.
    pub fn from_caption(scenario: Scenario, cfg: &SystemConfig) -> Self {
        let (l, lc, lp) = (cfg.n_paths, cfg.n_common_paths, cfg.n_private_paths());
        match scenario {
            Scenario::I => Self::new(scenario, 0, 2.min(lp), 0),
            Scenario::II => Self::new(scenario, 2.min(lc), lp, 0),
            Scenario::III => Self::new(scenario, lc, 1.min(lp), l.saturating_sub(lc + 1).min(lp)),
            Scenario::IV => Self::new(scenario, 2.min(lc), 0, l.saturating_sub(2.min(lc)).min(lp)),
        }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<(), ConfigError> {
        let (l, lc, lp) = (cfg.n_paths, cfg.n_common_paths, cfg.n_private_paths());
        let Self { scenario, l_ec, l_e1, l_e2 } = *self;
        let fail = |reason: String| Err(ConfigError::EveCounts { scenario, reason });
        match scenario {
            Scenario::I => {
                if l_ec != 0 || l_e2 != 0 {
                    return fail(format!("needs L_ec = L_e2 = 0, got ({l_ec}, {l_e2})"));
                }
                if !(1..=lp).contains(&l_e1) {
                    return fail(format!("needs 1 ≤ L_e1 ≤ L_p = {lp}, got {l_e1}"));
                }
            }
            Scenario::II => {
                if !(1..=lc).contains(&l_ec) {
                    return fail(format!("needs 1 ≤ L_ec ≤ L_c = {lc}, got {l_ec}"));
                }
                if l_e1 != lp || lp == 0 {
                    return fail(format!("needs L_e1 = L_p = {lp} ≥ 1, got {l_e1}"));
                }
                if l_e2 != 0 {
                    return fail(format!("needs L_e2 = 0, got {l_e2}"));
                }
                if l_ec + lp > l {
                    return fail(format!("L_ec + L_p = {} exceeds L = {l}", l_ec + lp));
                }
            }
            Scenario::III => {
                if l_ec != lc {
                    return fail(format!("needs L_ec = L_c = {lc}, got {l_ec}"));
                }
                if !(1..=lp).contains(&l_e1) {
                    return fail(format!("needs 1 ≤ L_e1 ≤ L_p = {lp}, got {l_e1}"));
                }
                if l_e2 > lp {
                    return fail(format!("needs L_e2 ≤ L_p = {lp}, got {l_e2}"));
                }
                if l_ec + l_e1 + l_e2 > l {
                    return fail(format!("L_ec + L_e1 + L_e2 = {} exceeds L = {l}", l_ec + l_e1 + l_e2));
                }
            }
            Scenario::IV => {
                if l_e1 != 0 {
                    return fail(format!("needs L_e1 = 0, got {l_e1}"));
                }
                if !(1..=lc).contains(&l_ec) {
                    return fail(format!("needs 1 ≤ L_ec ≤ L_c = {lc}, got {l_ec}"));
                }
                if l_e2 > lp {
                    return fail(format!("needs L_e2 ≤ L_p = {lp}, got {l_e2}"));
                }
                if l_ec + l_e2 > l {
                    return fail(format!("L_ec + L_e2 = {} exceeds L = {l}", l_ec + l_e2));
                }
            }
        }
        Ok(())
    }
}

/// All path counts entering the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathCounts {
    pub lc: u32,
    pub lp: u32,
    pub lec: u32,
    pub le1: u32,
    pub le2: u32,
}

impl PathCounts {
    pub fn new(cfg: &SystemConfig, eve: &EveLayout) -> Self {
        Self {
            lc: cfg.n_common_paths,
            lp: cfg.n_private_paths(),
            lec: eve.l_ec,
            le1: eve.l_e1,
            le2: eve.l_e2,
        }
    }
}

/// Basis-column index sets (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLayout {
    pub omega_1: Vec<u32>,
    pub omega_2: Vec<u32>,
    pub omega_c: Vec<u32>,
    pub omega_1p: Vec<u32>,
    pub omega_2p: Vec<u32>,
}

/// Contiguous windows centred in the basis: Ω_1 = [f, f+L), Ω_2 = [f+L_p, f+L_p+L)
/// with f = (N_s − (2L − L_c))/2 + 1, so Ω_c = [f+L_p, f+L).
pub fn build_path_layout(cfg: &SystemConfig) -> Result<PathLayout, ConfigError> {
    cfg.validate()?;
    let (ns, l, lc) = (cfg.n_antennas, cfg.n_paths, cfg.n_common_paths);
    let lp = l - lc;
    let first = (ns - (2 * l - lc)) / 2 + 1;
    let range = |a: u32, b: u32| (a..b).collect::<Vec<_>>();
    Ok(PathLayout {
        omega_1: range(first, first + l),
        omega_2: range(first + lp, first + lp + l),
        omega_c: range(first + lp, first + l),
        omega_1p: range(first, first + lp),
        omega_2p: range(first + l, first + l + lp),
    })
}

/// Eavesdropper's resolvable paths, split by the stream each one picks up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvePaths {
    pub common: Vec<u32>,
    pub private_1: Vec<u32>,
    pub private_2: Vec<u32>,
    /// Paths outside both users' windows; they carry no signal.
    pub filler: Vec<u32>,
}

impl EvePaths {
    pub fn all(&self) -> Vec<u32> {
        let mut v: Vec<u32> = [&self.common, &self.private_1, &self.private_2, &self.filler]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        v.sort_unstable();
        v
    }
}

/// Places the eavesdropper's window so it overlaps the users' sets in exactly
/// the counts of `eve`, then pads it up to L paths with free indices nearest
/// the window.
pub fn build_eve_paths(cfg: &SystemConfig, layout: &PathLayout, eve: &EveLayout) -> Result<EvePaths, ConfigError> {
    eve.validate(cfg)?;
    let (lec, le1, le2) = (eve.l_ec as usize, eve.l_e1 as usize, eve.l_e2 as usize);
    let first_n = |v: &[u32], n: usize| v[..n].to_vec();
    let last_n = |v: &[u32], n: usize| v[v.len() - n..].to_vec();
    let (common, private_1, private_2) = match eve.scenario {
        Scenario::I => (Vec::new(), first_n(&layout.omega_1p, le1), Vec::new()),
        Scenario::II => (first_n(&layout.omega_c, lec), layout.omega_1p.clone(), Vec::new()),
        Scenario::III => (
            layout.omega_c.clone(),
            last_n(&layout.omega_1p, le1),
            first_n(&layout.omega_2p, le2),
        ),
        Scenario::IV => (last_n(&layout.omega_c, lec), Vec::new(), first_n(&layout.omega_2p, le2)),
    };
    let used: Vec<u32> = [&common, &private_1, &private_2].into_iter().flatten().copied().collect();
    let (lo, hi) = (
        used.iter().copied().min().unwrap_or(1),
        used.iter().copied().max().unwrap_or(1),
    );
    let occupied = |j: u32| layout.omega_1.contains(&j) || layout.omega_2.contains(&j);
    let mut free: Vec<u32> = (1..=cfg.n_antennas).filter(|&j| !occupied(j)).collect();
    // nearest to the window first, ties to the lower index
    free.sort_by_key(|&j| (if j < lo { lo - j } else { j.saturating_sub(hi) }, j));
    let need = (cfg.n_paths as usize).saturating_sub(used.len());
    let mut filler: Vec<u32> = free.into_iter().take(need).collect();
    filler.sort_unstable();
    Ok(EvePaths { common, private_1, private_2, filler })
}

/// Squared path-gain norms ‖g‖² for one channel draw.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GainRealization {
    pub x_1c: f64,
    pub x_1p: f64,
    pub x_ec: f64,
    pub x_ep1: f64,
    pub x_ep2: f64,
}

/// Derived link-budget scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub r0: f64,
    pub delta: f64,
    pub delta_1c: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_ec: f64,
    pub delta_e1: f64,
    pub delta_e2: f64,
    pub theta_c: f64,
    pub theta_p: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub a_1: f64,
    pub a_2: f64,
}

impl LinkBudget {
    /// β_L = 3.66 + 24.3 log10 f_c, r_0 = 10^{−β_L/10}, δ = N_s ρ r_0 / L with ρ = P/σ².
    pub fn derive(cfg: &SystemConfig) -> Self {
        let beta_l = 3.66 + 24.3 * cfg.carrier_freq_ghz.log10();
        let r0 = 10f64.powf(-beta_l / 10.0);
        let rho = cfg.tx_power.mw() / cfg.noise_power.mw();
        let delta = cfg.n_antennas as f64 * rho * r0 / cfg.n_paths as f64;
        let a = cfg.pathloss_exponent;
        let at = |tau: f64, r: f64| delta * tau / r.powf(a);
        let delta_1c = at(cfg.tau_c, cfg.r_1);
        let delta_1 = at(cfg.tau_1, cfg.r_1);
        let delta_ec = at(cfg.tau_c, cfg.r_e);
        let delta_e1 = at(cfg.tau_1, cfg.r_e);
        let theta_c = cfg.rate_th_common.exp2();
        let theta_p = cfg.rate_th_private.exp2();
        let (eta_1, eta_2) = if delta_1c > 0.0 {
            ((theta_c - 1.0) / delta_1c, theta_c * delta_ec / delta_1c)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        // A_1 = Θ_p δ_e1/δ_1 = Θ_p (r_1/r_e)^α; written without the δ ratio so τ_1 = 0 stays finite
        let a_1 = theta_p * (cfg.r_1 / cfg.r_e).powf(a);
        let a_2 = if delta_1 > 0.0 {
            (theta_p - 1.0) / delta_1
        } else if theta_p > 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            r0,
            delta,
            delta_1c,
            delta_1,
            delta_2: at(cfg.tau_2, cfg.r_2),
            delta_ec,
            delta_e1,
            delta_e2: at(cfg.tau_2, cfg.r_e),
            theta_c,
            theta_p,
            eta_1,
            eta_2,
            a_1,
            a_2,
        }
    }

    /// (γ_1c, γ_1p) at U1 under SIC.
    pub fn sinr_user(&self, g: &GainRealization) -> (f64, f64) {
        let gamma_1p = self.delta_1 * g.x_1p;
        (self.delta_1c * g.x_1c / (gamma_1p + 1.0), gamma_1p)
    }

    /// (γ_ec, γ_ep1) at the eavesdropper; the unused component is 0.
    pub fn sinr_eve(&self, eve: &EveLayout, g: &GainRealization) -> Result<(f64, f64), ModelError> {
        let checks = [
            ("x_1c", g.x_1c, u32::MAX),
            ("x_1p", g.x_1p, u32::MAX),
            ("x_ec", g.x_ec, eve.l_ec),
            ("x_ep1", g.x_ep1, eve.l_e1),
            ("x_ep2", g.x_ep2, eve.l_e2),
        ];
        for (gain, value, kappa) in checks {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::BadGain { gain, value });
            }
            if kappa == 0 && value != 0.0 {
                return Err(ModelError::ShapeMismatch { gain, value });
            }
        }
        let pec = self.delta_ec * g.x_ec;
        let pe1 = self.delta_e1 * g.x_ep1;
        let pe2 = self.delta_e2 * g.x_ep2;
        Ok(match eve.scenario {
            Scenario::I => (0.0, pe1),
            Scenario::II => (pec / (pe1 + 1.0), pe1),
            Scenario::III => (pec / (pe1 + pe2 + 1.0), pe1 / (pe2 + 1.0)),
            Scenario::IV => (pec / (pe2 + 1.0), 0.0),
        })
    }

    /// Whether U1's scenario-relevant streams all clear their secrecy thresholds:
    /// (1 + γ_user) > Θ (1 + γ_eve) per stream.
    pub fn secrecy_ok(&self, eve: &EveLayout, g: &GainRealization) -> Result<bool, ModelError> {
        let (g1c, g1p) = self.sinr_user(g);
        let (gec, gep) = self.sinr_eve(eve, g)?;
        let common = || 1.0 + g1c > self.theta_c * (1.0 + gec);
        let private = || 1.0 + g1p > self.theta_p * (1.0 + gep);
        Ok(match eve.scenario {
            Scenario::I => private(),
            Scenario::IV => common(),
            Scenario::II | Scenario::III => common() && private(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_round_trip() {
        let p = Power::from_dbm(-71.0);
        assert_relative_eq!(p.dbm(), -71.0, epsilon = 1e-12);
        assert_relative_eq!(Power::from_dbm(0.0).mw(), 1.0);
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("iii".parse::<Scenario>().unwrap(), Scenario::III);
        assert_eq!("4".parse::<Scenario>().unwrap(), Scenario::IV);
        assert!("V".parse::<Scenario>().is_err());
        assert_eq!(Scenario::II.to_string(), "II");
    }

    #[test]
    fn link_budget_reference_values() {
        let b = LinkBudget::derive(&SystemConfig::default());
        let beta_l = 3.66 + 24.3 * 28f64.log10();
        assert!((beta_l - 38.82594).abs() < 1e-4);
        assert!((b.r0 - 1.31041e-4).abs() < 1e-8);
        assert!((b.a_1 - 0.060791).abs() < 1e-5);
        assert_relative_eq!(b.a_1, b.theta_p * b.delta_e1 / b.delta_1, max_relative = 1e-13);
    }

    #[test]
    fn zero_threshold_budget() {
        let cfg = SystemConfig { rate_th_private: 0.0, ..SystemConfig::default() };
        let b = LinkBudget::derive(&cfg);
        assert_eq!(b.theta_p, 1.0);
        assert_eq!(b.a_2, 0.0);
    }

    #[test]
    fn layout_fig2() {
        let lay = build_path_layout(&SystemConfig::default()).unwrap();
        assert_eq!(lay.omega_c.len(), 4);
        assert_eq!(lay.omega_1p.len(), 4);
        assert_eq!(lay.omega_2p.len(), 4);
        assert!(lay.omega_1.iter().chain(&lay.omega_2).all(|&j| (1..=50).contains(&j)));
        let inter: Vec<u32> = lay.omega_1.iter().filter(|j| lay.omega_2.contains(j)).copied().collect();
        assert_eq!(inter, lay.omega_c);
    }

    #[test]
    fn layout_full_overlap_and_small_basis() {
        let cfg = SystemConfig { n_antennas: 5, n_paths: 5, n_common_paths: 5, ..SystemConfig::default() };
        let lay = build_path_layout(&cfg).unwrap();
        assert_eq!(lay.omega_1, lay.omega_2);
        assert!(lay.omega_1p.is_empty() && lay.omega_2p.is_empty());

        let cfg = SystemConfig { n_antennas: 9, n_paths: 5, n_common_paths: 3, ..SystemConfig::default() };
        let lay = build_path_layout(&cfg).unwrap();
        assert_eq!(lay.omega_c.len(), 3);
        assert_eq!((lay.omega_1p.len(), lay.omega_2p.len()), (2, 2));
        assert!(lay.omega_2.iter().all(|&j| j <= 9));

        let cfg = SystemConfig { n_antennas: 8, n_paths: 5, n_common_paths: 1, ..SystemConfig::default() };
        assert!(matches!(build_path_layout(&cfg), Err(ConfigError::WindowsDoNotFit { .. })));
    }

    #[test]
    fn caption_counts_are_valid() {
        let cfg = SystemConfig::default();
        for s in Scenario::ALL {
            let eve = EveLayout::from_caption(s, &cfg);
            eve.validate(&cfg).unwrap();
        }
        // L − L_ec = 6 would exceed L_p = 4
        assert_eq!(EveLayout::from_caption(Scenario::IV, &cfg).l_e2, 4);
        assert_eq!(EveLayout::from_caption(Scenario::III, &cfg).l_e2, 3);
    }

    #[test]
    fn eve_paths_match_counts() {
        let cfg = SystemConfig::default();
        let lay = build_path_layout(&cfg).unwrap();
        for s in Scenario::ALL {
            let eve = EveLayout::from_caption(s, &cfg);
            let p = build_eve_paths(&cfg, &lay, &eve).unwrap();
            let count = |set: &[u32], target: &[u32]| set.iter().filter(|j| target.contains(j)).count() as u32;
            let all = p.all();
            assert_eq!(count(&all, &lay.omega_c), eve.l_ec);
            assert_eq!(count(&all, &lay.omega_1p), eve.l_e1);
            assert_eq!(count(&all, &lay.omega_2p), eve.l_e2);
            assert_eq!(all.len(), cfg.n_paths as usize);
        }
    }

    #[test]
    fn sinr_special_cases() {
        let cfg = SystemConfig::default();
        let b = LinkBudget::derive(&cfg);
        let g = GainRealization { x_1c: 0.0, x_1p: 2.0, x_ec: 1.0, x_ep1: 1.5, x_ep2: 0.0 };
        assert_eq!(b.sinr_user(&g).0, 0.0);
        let eve1 = EveLayout::new(Scenario::I, 0, 2, 0);
        let g1 = GainRealization { x_ec: 0.0, ..g };
        assert_eq!(b.sinr_eve(&eve1, &g1).unwrap().0, 0.0);
        let eve2 = EveLayout::new(Scenario::II, 2, 4, 0);
        let eve3 = EveLayout::new(Scenario::III, 4, 1, 3);
        assert_eq!(b.sinr_eve(&eve2, &g).unwrap(), b.sinr_eve(&eve3, &g).unwrap());
        let eve4 = EveLayout::new(Scenario::IV, 2, 0, 4);
        let g4 = GainRealization { x_ep1: 0.0, ..g };
        assert_relative_eq!(b.sinr_eve(&eve4, &g4).unwrap().0, b.delta_ec * g4.x_ec);
        assert!(matches!(b.sinr_eve(&eve4, &g), Err(ModelError::ShapeMismatch { gain: "x_ep1", .. })));
    }

    #[test]
    fn no_private_power() {
        let cfg = SystemConfig { tau_1: 0.0, tau_c: 0.5, tau_2: 0.5, ..SystemConfig::default() };
        let b = LinkBudget::derive(&cfg);
        let g = GainRealization { x_1c: 3.0, x_1p: 2.0, ..Default::default() };
        let (g1c, g1p) = b.sinr_user(&g);
        assert_eq!(g1p, 0.0);
        assert_relative_eq!(g1c, b.delta_1c * 3.0);
    }
}
