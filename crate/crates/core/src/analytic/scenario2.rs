//! Scenario II: the private stream leaks fully, the common stream partly.
//!
//! SCP = Δ_2-sum − Δ_3-sum, where the first part is Pr{X_1c > η_1 X_1, X_1 > Θ_p Z}
//! (X_1 = 1 + δ_1 X_1p, Z = 1 + δ_e1 X_ep1) and the second removes the event
//! that the eavesdropper's common SINR defeats U1's common secrecy margin.

use std::collections::BTreeMap;

use super::{check_scenario, counts, lnf, ln_pow, sorted_sum, SecrecyResult, SopError};
use crate::model::{EveLayout, LinkBudget, PathCounts, Scenario, SystemConfig};
use crate::quadrature::{unit_interval_rule, QuadratureSpec};

pub fn scp_scenario_2(
    cfg: &SystemConfig,
    eve: &EveLayout,
    b: &LinkBudget,
    quad: &QuadratureSpec,
) -> Result<SecrecyResult, SopError> {
    check_scenario(eve, Scenario::II)?;
    evaluate(b, &counts(cfg, eve), quad)
}

/// Shared with Scenario III when its U2 interference vanishes; valid for any L_e1 ≥ 1.
pub(crate) fn evaluate(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<SecrecyResult, SopError> {
    if b.delta_1c == 0.0 {
        return Ok(SecrecyResult::zero("no_common_power"));
    }
    if c.lp == 0 || b.delta_1 == 0.0 {
        return Ok(SecrecyResult::zero("no_private_power"));
    }
    let d2 = delta2_sum(b, c);
    let d3 = delta3_sum(b, c, quad)?;
    let mut terms = BTreeMap::new();
    terms.insert("Delta_2".to_string(), d2);
    terms.insert("Delta_3".to_string(), d3);
    SecrecyResult::from_scp(d2 - d3, terms)
}

fn beta(b: &LinkBudget) -> f64 {
    b.eta_1 + 1.0 / b.delta_1
}

/// Σ_{t<L_c} δ_1^{−L_p} η_1^t δ_e1^{−L_e1} Δ_2(t) / (t! (L_p−1)! (L_e1−1)!).
///
/// Δ_2 is expanded with (Θ_p (1 + δ_e1 y) − 1)^k = Σ_i C(k,i) (Θ_p δ_e1 y)^i (Θ_p − 1)^{k−i},
/// so every term is positive. The printed coefficient form alternates in sign;
/// it is kept as [`delta2_sum_alternating`] for cross-checking.
pub fn delta2_sum(b: &LinkBudget, c: &PathCounts) -> f64 {
    let (lc, lp, le1) = (c.lc, c.lp, c.le1);
    let (tp, eta1, d1, de1) = (b.theta_p, b.eta_1, b.delta_1, b.delta_e1);
    let be = beta(b);
    let ln_rate = (be * tp + 1.0 / de1).ln();
    let ln_outer = -(lp as f64) * d1.ln() - le1 as f64 * de1.ln() - lnf(lp - 1) - lnf(le1 - 1);
    let mut acc = Vec::new();
    for t in 0..lc {
        for m in 0..=t {
            let ln_m = ln_pow(eta1, t as f64) - eta1 - lnf(m) - lnf(t - m) + lnf(m + lp - 1)
                - be * (tp - 1.0)
                + ln_outer;
            for k in 0..m + lp {
                let ln_k = ln_m - lnf(k) - (m + lp - k) as f64 * be.ln();
                for i in 0..=k {
                    let ln = ln_k + lnf(k) - lnf(i) - lnf(k - i)
                        + ln_pow(tp, i as f64)
                        + ln_pow(tp - 1.0, (k - i) as f64)
                        + lnf(i + le1 - 1)
                        - (i + le1) as f64 * ln_rate;
                    acc.push(ln.exp());
                }
            }
        }
    }
    sorted_sum(acc)
}

/// The same quantity through the printed A_5 coefficients (alternating in sign).
pub fn delta2_sum_alternating(b: &LinkBudget, c: &PathCounts) -> f64 {
    let (lc, lp, le1) = (c.lc, c.lp, c.le1);
    let (tp, eta1, d1, de1) = (b.theta_p, b.eta_1, b.delta_1, b.delta_e1);
    let be = beta(b);
    let mut outer = Vec::new();
    for t in 0..lc {
        let mut d2 = Vec::new();
        for m in 0..=t {
            for k in 0..m + lp {
                for i in 0..=k {
                    for j in 0..=i {
                        let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                        let ln_a5 = lnf(m + lp - 1) + lnf(t) + (1.0 / d1 - tp * be) + ln_pow(tp, i as f64)
                            - lnf(m)
                            - lnf(t - m)
                            - (m + lp - k) as f64 * be.ln()
                            - lnf(k - i)
                            - lnf(j)
                            - lnf(i - j);
                        let ln = ln_a5 + lnf(j + le1 - 1) - (j + le1) as f64 * (tp * be + 1.0 / de1).ln();
                        d2.push(sign * ln.exp());
                    }
                }
            }
        }
        let ln_pre = -(lp as f64) * d1.ln() + ln_pow(eta1, t as f64) - le1 as f64 * de1.ln()
            - lnf(t)
            - lnf(lp - 1)
            - lnf(le1 - 1);
        outer.push(ln_pre.exp() * sorted_sum(d2));
    }
    sorted_sum(outer)
}

/// Δ_3 = E[1{W > 0, X_1 > Θ_p Z} Q(L_ec, Z W / (η_2 X_1))] with W = X_1c − η_1 X_1.
///
/// The W-integral is done term by term, which leaves
/// Σ_{k<L_c} Σ_{s<L_ec} (k+s)! η_1^{L_c−1−k} η_2^{k+1} / (s! k! (L_c−1−k)!)
/// · E[1{X_1 > Θ_p Z} e^{−η_1 X_1} X_1^{L_c} Z^s (η_2 X_1 + Z)^{−(k+s+1)}].
/// With b = Θ_p Z / X_1 and Θ_p Z − b = Θ_p δ_e1 Y + (Θ_p − b) the Y-integral is a
/// Gamma function, so only a positive b-integral over (0, 1) remains; it runs on
/// `quad.order_i` nodes of `quad.b_rule`.
pub fn delta3_sum(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<f64, SopError> {
    let (lc, lp, lec, le1) = (c.lc, c.lp, c.lec, c.le1);
    let (tp, eta1, eta2, d1, de1) = (b.theta_p, b.eta_1, b.eta_2, b.delta_1, b.delta_e1);
    let gy = beta(b) * tp * de1;
    let ln_const = (lc + 1) as f64 * tp.ln() - lp as f64 * d1.ln() - lnf(lp - 1) - lnf(le1 - 1);
    let rule = unit_interval_rule(quad.order_i, quad.b_rule);
    let mut acc = Vec::with_capacity(rule.len() * (lc * lec * lp * (lc + 1)) as usize);
    for (x, w) in rule.iter() {
        let (ln_b, ln_bg, ln_tb) = (x.ln(), (x + gy).ln(), (tp - x).ln());
        let ln_eb = (eta2 * tp + x).ln();
        // e^{1/δ_1 − βΘ_p/b} without the cancellation
        let ln_node = w.ln() - eta1 * tp / x - (tp - x) / (x * d1) + ln_const;
        for k in 0..lc {
            for s in 0..lec {
                let ln_ks = ln_node + lnf(k + s) - lnf(s) - lnf(k) - lnf(lc - 1 - k)
                    + ln_pow(eta1, (lc - 1 - k) as f64)
                    + ln_pow(eta2, (k + 1) as f64)
                    + (k + s) as f64 * ln_b
                    - (lc + lp) as f64 * ln_b
                    - (k + s + 1) as f64 * ln_eb;
                for i in 0..lp {
                    for j in 0..=lc - k {
                        let p = le1 + i + j;
                        let ln = ln_ks + lnf(lp - 1) - lnf(i) - lnf(lp - 1 - i) + lnf(lc - k) - lnf(j) - lnf(lc - k - j)
                            + ln_pow(tp * de1, i as f64)
                            + ln_pow(de1, j as f64)
                            + (lp - 1 - i) as f64 * ln_tb
                            + lnf(p - 1)
                            + p as f64 * (ln_b - ln_bg);
                        acc.push(ln.exp());
                    }
                }
            }
        }
    }
    let v = sorted_sum(acc);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_3" });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta2_forms_agree() {
        for p_dbm in [-10.0, 0.0, 10.0, 20.0] {
            let cfg = SystemConfig { tx_power: crate::model::Power::from_dbm(p_dbm), ..SystemConfig::default() };
            let b = LinkBudget::derive(&cfg);
            let c = PathCounts { lc: 4, lp: 4, lec: 2, le1: 4, le2: 0 };
            assert_relative_eq!(delta2_sum(&b, &c), delta2_sum_alternating(&b, &c), max_relative = 1e-9);
        }
    }

    #[test]
    fn no_common_power_is_certain_outage() {
        let cfg = SystemConfig { tau_c: 0.0, tau_1: 0.5, tau_2: 0.5, ..SystemConfig::default() };
        let eve = EveLayout::new(Scenario::II, 2, 4, 0);
        let r = scp_scenario_2(&cfg, &eve, &LinkBudget::derive(&cfg), &QuadratureSpec::default()).unwrap();
        assert_eq!(r.sop, 1.0);
    }
}
