//! Closed-form secrecy connection/outage probabilities for the four
//! eavesdropper scenarios.

pub mod preform;
pub mod scenario1;
pub mod scenario2;
pub mod scenario3;
pub mod scenario4;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{ConfigError, EveLayout, LinkBudget, PathCounts, Scenario, SystemConfig};
use crate::quadrature::{QuadError, QuadratureSpec};
use crate::specfun::gamma::ln_factorial;
use crate::specfun::{MeijerG2112, SpecFunError};

/// Tolerance on the raw SCP before it is clamped into [0, 1].
pub const RANGE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SopError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("evaluator for scenario {expected} called with a scenario {got} layout")]
    ScenarioMismatch { expected: Scenario, got: Scenario },
    #[error("secrecy connection probability {scp:e} falls outside [−{RANGE_EPS:e}, 1 + {RANGE_EPS:e}]")]
    OutOfRange { scp: f64 },
    #[error("term {term} evaluated to a non-finite value")]
    NonFinite { term: &'static str },
}

/// Analytic result: SCP, SOP = 1 − SCP and named intermediate terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyResult {
    pub scp: f64,
    pub sop: f64,
    pub term_diagnostics: BTreeMap<String, f64>,
    /// False when a quadrature-order doubling check was run and failed.
    pub converged: bool,
    /// Set when the evaluation had to step off a degenerate parameter point.
    pub degenerate: bool,
}

impl SecrecyResult {
    /// Range-checks a raw SCP, then clamps it.
    pub(crate) fn from_scp(scp: f64, terms: BTreeMap<String, f64>) -> Result<Self, SopError> {
        if !scp.is_finite() {
            return Err(SopError::NonFinite { term: "scp" });
        }
        if !(-RANGE_EPS..=1.0 + RANGE_EPS).contains(&scp) {
            return Err(SopError::OutOfRange { scp });
        }
        let scp = scp.clamp(0.0, 1.0);
        Ok(Self { scp, sop: 1.0 - scp, term_diagnostics: terms, converged: true, degenerate: false })
    }

    pub(crate) fn zero(reason: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(format!("short_circuit_{reason}"), 0.0);
        Self { scp: 0.0, sop: 1.0, term_diagnostics: terms, converged: true, degenerate: false }
    }
}

/// Dispatches to the scenario evaluator.
pub fn sop(cfg: &SystemConfig, eve: &EveLayout, quad: &QuadratureSpec) -> Result<SecrecyResult, SopError> {
    cfg.validate()?;
    eve.validate(cfg)?;
    quad.validate()?;
    let budget = LinkBudget::derive(cfg);
    match eve.scenario {
        Scenario::I => scenario1::scp_scenario_1(cfg, eve, &budget),
        Scenario::II => scenario2::scp_scenario_2(cfg, eve, &budget, quad),
        Scenario::III => scenario3::scp_scenario_3(cfg, eve, &budget, quad),
        Scenario::IV => scenario4::scp_scenario_4(cfg, eve, &budget),
    }
}

/// Like [`sop`], but also evaluates at doubled quadrature orders and clears
/// `converged` if the two SOPs differ by 1e−3 relative or more.
pub fn sop_checked(cfg: &SystemConfig, eve: &EveLayout, quad: &QuadratureSpec) -> Result<SecrecyResult, SopError> {
    let mut base = sop(cfg, eve, quad)?;
    if matches!(eve.scenario, Scenario::II | Scenario::III) {
        let fine = sop(cfg, eve, &quad.doubled())?;
        let scale = base.sop.abs().max(fine.sop.abs()).max(f64::MIN_POSITIVE);
        base.converged = (base.sop - fine.sop).abs() / scale < 1e-3;
        base.term_diagnostics.insert("sop_doubled_orders".into(), fine.sop);
    }
    Ok(base)
}

pub(crate) fn check_scenario(eve: &EveLayout, expected: Scenario) -> Result<(), SopError> {
    if eve.scenario != expected {
        return Err(SopError::ScenarioMismatch { expected, got: eve.scenario });
    }
    Ok(())
}

pub(crate) fn counts(cfg: &SystemConfig, eve: &EveLayout) -> PathCounts {
    PathCounts::new(cfg, eve)
}

/// ln n! for small integer arguments.
#[inline]
pub(crate) fn lnf(n: u32) -> f64 {
    ln_factorial(n as usize)
}

/// e·ln(base) with 0^0 = 1 and 0^e = 0 (ln → −∞) for e > 0.
#[inline]
pub(crate) fn ln_pow(base: f64, e: f64) -> f64 {
    debug_assert!(base >= 0.0, "negative base {base}");
    if e == 0.0 {
        0.0
    } else if base == 0.0 {
        if e > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        e * base.ln()
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Sums signed terms in descending magnitude with compensation.
pub(crate) fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// Meijer G values for a fixed argument list, cached per (a, M) pattern.
pub(crate) struct GGrid<'a> {
    zs: &'a [f64],
    tables: HashMap<(u32, u32), Vec<f64>>,
}

impl<'a> GGrid<'a> {
    pub(crate) fn new(zs: &'a [f64]) -> Self {
        Self { zs, tables: HashMap::new() }
    }

    /// G[z | 1−a; M−a, 0] at every stored z.
    pub(crate) fn values(&mut self, a: u32, m: u32) -> Result<&[f64], SopError> {
        if !self.tables.contains_key(&(a, m)) {
            let g = MeijerG2112::laplace_pattern(a, m)?;
            let vals = self.zs.iter().map(|&z| g.eval(z)).collect::<Result<Vec<_>, _>>()?;
            self.tables.insert((a, m), vals);
        }
        Ok(&self.tables[&(a, m)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_pow_edges() {
        assert_eq!(ln_pow(0.0, 0.0), 0.0);
        assert_eq!(ln_pow(0.0, 2.0), f64::NEG_INFINITY);
        assert!((ln_pow(2.0, 3.0) - 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(sorted_sum(terms), 2.0);
    }

    #[test]
    fn range_check() {
        assert!(SecrecyResult::from_scp(1.0 + 5e-10, BTreeMap::new()).is_ok());
        assert!(matches!(SecrecyResult::from_scp(-1e-6, BTreeMap::new()), Err(SopError::OutOfRange { .. })));
        let r = SecrecyResult::from_scp(-5e-10, BTreeMap::new()).unwrap();
        assert_eq!((r.scp, r.sop), (0.0, 1.0));
    }
}
