//! Scenario IV: only the common stream leaks, with U2's private stream
//! interfering at the eavesdropper.
//!
//! SCP = ∫ f_{γ_ec}(y) F̄_{γ_1c}(Θ_c(1+y) − 1) dy, expanded over the coefficients
//! ϖ_1c(t, m) of U1's common-SINR CCDF and ϖ_ec(s, n) of the eavesdropper's
//! common-SINR density; each remaining one-dimensional integral is a φ-integral.

use std::collections::{BTreeMap, HashMap};

use super::{check_scenario, counts, lnf, ln_pow, sorted_sum, SecrecyResult, SopError};
use crate::model::{EveLayout, LinkBudget, PathCounts, Scenario, SystemConfig};
use crate::specfun::{phi_integral, PhiParams};

pub fn scp_scenario_4(cfg: &SystemConfig, eve: &EveLayout, b: &LinkBudget) -> Result<SecrecyResult, SopError> {
    check_scenario(eve, Scenario::IV)?;
    let c = counts(cfg, eve);
    if b.delta_1c == 0.0 {
        return Ok(SecrecyResult::zero("no_common_power"));
    }
    let (d9, d10) = evaluate(b, &c)?;
    let mut terms = BTreeMap::new();
    terms.insert("Delta_9".to_string(), d9);
    terms.insert("Delta_10".to_string(), d10);
    SecrecyResult::from_scp(d9 + d10, terms)
}

/// ln of the rising factorial (x)_n for integer x ≥ 0; −∞ when it vanishes.
fn ln_rising(x: u32, n: u32) -> f64 {
    if n == 0 {
        0.0
    } else if x == 0 {
        f64::NEG_INFINITY
    } else {
        lnf(x + n - 1) - lnf(x - 1)
    }
}

/// ϖ_1c(t, m) = δ_1^m (L_p)_m / (m! δ_1c^t (t−m)!), in log form.
fn ln_w1(b: &LinkBudget, c: &PathCounts, t: u32, m: u32) -> f64 {
    ln_pow(b.delta_1, m as f64) + ln_rising(c.lp, m) - lnf(m) - t as f64 * b.delta_1c.ln() - lnf(t - m)
}

/// ϖ_ec(s, n) = δ_e2^n (L_e2)_n / (n! δ_ec^s (s+1−n)!), in log form.
fn ln_we(b: &LinkBudget, c: &PathCounts, s: u32, n: u32) -> f64 {
    ln_pow(b.delta_e2, n as f64) + ln_rising(c.le2, n) - lnf(n) - s as f64 * b.delta_ec.ln() - lnf(s + 1 - n)
}

/// φ arguments of the inner integral for U1 index (t, m) and eavesdropper
/// index (s, n), with `extra` added to the interference exponent.
pub fn phi_params(b: &LinkBudget, c: &PathCounts, o: u32, m: u32, s: u32, n: u32, extra: u32) -> PhiParams {
    let tc = b.theta_c;
    PhiParams {
        c1: tc / b.delta_1c + 1.0 / b.delta_ec,
        c2: s + o,
        c3: b.delta_1 * tc / (b.delta_1 * (tc - 1.0) + b.delta_1c),
        c4: (m + c.lp) as f64,
        c5: b.delta_e2 / b.delta_ec,
        c6: (n + c.le2 + extra) as f64,
    }
}

/// Memoised φ-integrals; c1, c3, c5 are fixed for one link budget.
struct PhiCache<'a> {
    b: &'a LinkBudget,
    c: &'a PathCounts,
    memo: HashMap<(u32, u32, u32), f64>,
}

impl PhiCache<'_> {
    fn get(&mut self, c2: u32, m: u32, n_extra: u32) -> Result<f64, SopError> {
        let key = (c2, m, n_extra);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        // s + o = c2, n + extra = n_extra: only the sums enter
        let v = phi_integral(phi_params(self.b, self.c, c2, m, 0, n_extra, 0))?;
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Δ(t, m, s, n, extra) = e^{−(Θ_c−1)/δ_1c} Σ_{o≤t} C(t,o) Θ_c^o (Θ_c−1)^{t−o}
///   (δ_1(Θ_c−1)/δ_1c + 1)^{−m−L_p} φ(…).
fn inner(cache: &mut PhiCache<'_>, t: u32, m: u32, s: u32, n: u32, extra: u32) -> Result<f64, SopError> {
    let b = cache.b;
    let tc = b.theta_c;
    let lp = cache.c.lp;
    let shift = b.delta_1 * (tc - 1.0) / b.delta_1c + 1.0;
    let mut terms = Vec::with_capacity(t as usize + 1);
    for o in 0..=t {
        let ln = -(tc - 1.0) / b.delta_1c + lnf(t) - lnf(o) - lnf(t - o)
            + ln_pow(tc, o as f64)
            + ln_pow(tc - 1.0, (t - o) as f64)
            - (m + lp) as f64 * shift.ln();
        terms.push(ln.exp() * cache.get(s + o, m, n + extra)?);
    }
    Ok(sorted_sum(terms))
}

/// One term of the expansion, exposed for the pre-form oracle:
/// Δ(t, m, s, n, extra) = ∫₀^∞ [x^t e^{−x/δ_1c} (δ_1 x/δ_1c + 1)^{−m−L_p}]_{x = Θ_c y + Θ_c − 1}
///                         y^s e^{−y/δ_ec} (δ_e2 y/δ_ec + 1)^{−n−L_e2−extra} dy.
pub fn inner_term(b: &LinkBudget, c: &PathCounts, t: u32, m: u32, s: u32, n: u32, extra: u32) -> Result<f64, SopError> {
    let mut cache = PhiCache { b, c, memo: HashMap::new() };
    inner(&mut cache, t, m, s, n, extra)
}

/// Returns (Δ_9 part, Δ_10 part): the terms built from the density's
/// exponential/power factor and from its interference factor respectively.
pub fn evaluate(b: &LinkBudget, c: &PathCounts) -> Result<(f64, f64), SopError> {
    let mut cache = PhiCache { b, c, memo: HashMap::new() };
    let (lc, lec, le2) = (c.lc, c.lec, c.le2);
    let mut d9 = Vec::new();
    let mut d10 = Vec::new();
    let ln_dec = b.delta_ec.ln();
    for t in 0..lc {
        for m in 0..=t {
            let lw1 = ln_w1(b, c, t, m);
            if lw1 == f64::NEG_INFINITY {
                continue;
            }
            for s in 0..lec {
                for n in 0..=s {
                    let lwe = ln_we(b, c, s, n);
                    if lwe == f64::NEG_INFINITY {
                        continue;
                    }
                    let coef = (lw1 + lwe + ((s + 1 - n) as f64).ln()).exp();
                    d9.push(coef * (-ln_dec).exp() * inner(&mut cache, t, m, s, n, 0)?);
                    if n + le2 > 0 && b.delta_e2 > 0.0 {
                        let k = b.delta_e2 / b.delta_ec * (n + le2) as f64;
                        d10.push(coef * k * inner(&mut cache, t, m, s, n, 1)?);
                    }
                }
            }
            for s in 0..lec.saturating_sub(1) {
                for n in 0..=s + 1 {
                    let lwe = ln_we(b, c, s, n);
                    if lwe == f64::NEG_INFINITY {
                        continue;
                    }
                    let coef = (lw1 + lwe + ((s + 1) as f64).ln() - ln_dec).exp();
                    d9.push(-coef * inner(&mut cache, t, m, s, n, 0)?);
                }
            }
        }
    }
    let (d9, d10) = (sorted_sum(d9), sorted_sum(d10));
    if !(d9.is_finite() && d10.is_finite()) {
        return Err(SopError::NonFinite { term: "Delta_9/Delta_10" });
    }
    Ok((d9, d10))
}

/// Density of the eavesdropper's common SINR as the expansion writes it.
pub fn eve_common_pdf(b: &LinkBudget, c: &PathCounts, y: f64) -> f64 {
    let (f9, f10) = eve_common_pdf_parts(b, c, y);
    f9 + f10
}

/// The density split into the pieces that produce Δ_9 (exponential/power
/// derivative) and Δ_10 (interference-factor derivative).
pub fn eve_common_pdf_parts(b: &LinkBudget, c: &PathCounts, y: f64) -> (f64, f64) {
    let (lec, le2) = (c.lec, c.le2);
    let (dec, de2) = (b.delta_ec, b.delta_e2);
    let base = |s: u32, n: u32, extra: u32| {
        (ln_pow(y, s as f64) - y / dec - (n + le2 + extra) as f64 * (de2 * y / dec).ln_1p()).exp()
    };
    let mut p9 = Vec::new();
    let mut p10 = Vec::new();
    for s in 0..lec {
        for n in 0..=s {
            let we = ln_we(b, c, s, n).exp();
            p9.push(we * (s + 1 - n) as f64 * base(s, n, 0) / dec);
            p10.push(we * (s + 1 - n) as f64 * de2 / dec * (n + le2) as f64 * base(s, n, 1));
        }
    }
    for s in 0..lec.saturating_sub(1) {
        for n in 0..=s + 1 {
            p9.push(-ln_we(b, c, s, n).exp() * (s + 1) as f64 * base(s, n, 0) / dec);
        }
    }
    (sorted_sum(p9), sorted_sum(p10))
}

/// U1's common-SINR CCDF as the expansion writes it:
/// Σ_{t<L_c} Σ_{m≤t} ϖ_1c(t,m) x^t e^{−x/δ_1c} (δ_1 x/δ_1c + 1)^{−m−L_p}.
pub fn user_common_ccdf(b: &LinkBudget, c: &PathCounts, x: f64) -> f64 {
    let mut terms = Vec::new();
    for t in 0..c.lc {
        for m in 0..=t {
            let ln = ln_w1(b, c, t, m) + ln_pow(x, t as f64) - x / b.delta_1c
                - (m + c.lp) as f64 * (b.delta_1 * x / b.delta_1c).ln_1p();
            terms.push(ln.exp());
        }
    }
    sorted_sum(terms)
}

/// Pr{γ_ec > y} = Σ_{s<L_ec} Σ_{n≤s} y^s e^{−y/δ_ec} δ_e2^n (L_e2)_n / (δ_ec^s n! (s−n)!) (1 + δ_e2 y/δ_ec)^{−n−L_e2}.
pub fn eve_common_ccdf(b: &LinkBudget, c: &PathCounts, y: f64) -> f64 {
    let (dec, de2) = (b.delta_ec, b.delta_e2);
    let mut terms = Vec::new();
    for s in 0..c.lec {
        for n in 0..=s {
            let ln = ln_pow(y, s as f64) - y / dec + ln_pow(de2, n as f64) + ln_rising(c.le2, n)
                - s as f64 * dec.ln()
                - lnf(n)
                - lnf(s - n)
                - (n + c.le2) as f64 * (de2 * y / dec).ln_1p();
            terms.push(ln.exp());
        }
    }
    sorted_sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_is_minus_ccdf_derivative() {
        let b = LinkBudget::derive(&SystemConfig::default());
        let c = PathCounts { lc: 4, lp: 4, lec: 2, le1: 0, le2: 4 };
        for y in [0.05f64, 0.3, 1.0, 2.5] {
            let h = 1e-5 * y.max(1e-3);
            let numeric = -(eve_common_ccdf(&b, &c, y + h) - eve_common_ccdf(&b, &c, y - h)) / (2.0 * h);
            assert_relative_eq!(eve_common_pdf(&b, &c, y), numeric, max_relative = 1e-6);
        }
    }

    #[test]
    fn no_common_power_is_certain_outage() {
        let cfg = SystemConfig { tau_c: 0.0, tau_1: 0.5, tau_2: 0.5, ..SystemConfig::default() };
        let eve = EveLayout::new(Scenario::IV, 2, 0, 4);
        let r = scp_scenario_4(&cfg, &eve, &LinkBudget::derive(&cfg)).unwrap();
        assert_eq!(r.sop, 1.0);
    }
}
