//! Scenario I: only the private stream leaks.
//!
//! SCP = Pr{X_1p > A_2 + A_1 X_ep1}
//!     = Σ_{t<L_p} Σ_{n≤t} e^{−A_2} A_1^n A_2^{t−n} (L_e1+n−1)!
//!       / (n! (t−n)! (L_e1−1)! (A_1+1)^{L_e1+n}).

use std::collections::BTreeMap;

use super::{check_scenario, counts, lnf, ln_pow, sorted_sum, SecrecyResult, SopError};
use crate::model::{EveLayout, LinkBudget, Scenario, SystemConfig};

pub fn scp_scenario_1(cfg: &SystemConfig, eve: &EveLayout, b: &LinkBudget) -> Result<SecrecyResult, SopError> {
    check_scenario(eve, Scenario::I)?;
    let c = counts(cfg, eve);
    if c.lp == 0 || b.delta_1 == 0.0 {
        return Ok(SecrecyResult::zero("no_private_power"));
    }
    let value = closed_sum(b.a_1, b.a_2, c.lp, c.le1);
    let mut terms = BTreeMap::new();
    terms.insert("scp_double_sum".to_string(), value);
    SecrecyResult::from_scp(value, terms)
}

/// The closed double sum for given (A_1, A_2, L_p, L_e1).
pub fn closed_sum(a1: f64, a2: f64, lp: u32, le1: u32) -> f64 {
    let ln_a1p1 = (a1 + 1.0).ln();
    let terms = (0..lp)
        .flat_map(|t| (0..=t).map(move |n| (t, n)))
        .map(|(t, n)| {
            let ln = -a2 + ln_pow(a1, n as f64) + ln_pow(a2, (t - n) as f64) + lnf(le1 + n - 1)
                - lnf(n)
                - lnf(t - n)
                - lnf(le1 - 1)
                - (le1 + n) as f64 * ln_a1p1;
            ln.exp()
        })
        .collect();
    sorted_sum(terms)
}
