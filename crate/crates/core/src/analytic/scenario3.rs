//! Scenario III: the common stream leaks fully and the private stream partly,
//! with U2's private stream interfering at the eavesdropper.
//!
//! SCP = Δ_5 − Σ Δ_6 − ΣΣ Δ_7 + ΣΣΣ Δ_8.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{check_scenario, counts, lnf, ln_pow, scenario2, sorted_sum, CompensatedSum, GGrid, SecrecyResult, SopError};
use crate::model::{EveLayout, LinkBudget, PathCounts, Scenario, SystemConfig};
use crate::quadrature::{cached_laguerre, chebyshev_b_nodes, LambdaRule, QuadratureSpec};
use crate::specfun::gamma::{gamma_upper, ln_gamma};
use crate::specfun::MeijerG2112;

/// Θ_p − 1 used by the Chebyshev λ-rule when Θ_p = 1.
const THETA_OFFSET: f64 = 1e-6;

pub fn scp_scenario_3(
    cfg: &SystemConfig,
    eve: &EveLayout,
    b: &LinkBudget,
    quad: &QuadratureSpec,
) -> Result<SecrecyResult, SopError> {
    check_scenario(eve, Scenario::III)?;
    let c = counts(cfg, eve);
    if b.delta_1c == 0.0 {
        return Ok(SecrecyResult::zero("no_common_power"));
    }
    if c.lp == 0 || b.delta_1 == 0.0 {
        return Ok(SecrecyResult::zero("no_private_power"));
    }
    if c.le2 == 0 || b.delta_e2 == 0.0 {
        // no interference: the eavesdropper SINRs are Scenario II's with L_ec = L_c
        let reduced = PathCounts { lec: c.lc, le2: 0, ..c };
        let mut r = scenario2::evaluate(b, &reduced, quad)?;
        r.term_diagnostics.insert("routed_to_scenario_2".into(), 1.0);
        return Ok(r);
    }
    let d5 = delta5(b, &c);
    let s6 = delta6_sum(b, &c)?;
    let (s7, degenerate) = delta7_sum(b, &c, quad)?;
    let s8 = delta8_sum(b, &c, quad)?;
    let mut terms = BTreeMap::new();
    terms.insert("Delta_5".to_string(), d5);
    terms.insert("Delta_6".to_string(), s6);
    terms.insert("Delta_7".to_string(), s7);
    terms.insert("Delta_8".to_string(), s8);
    let mut r = SecrecyResult::from_scp(sorted_sum(vec![d5, -s6, -s7, s8]), terms)?;
    r.degenerate = degenerate;
    Ok(r)
}

fn beta(b: &LinkBudget) -> f64 {
    b.eta_1 + 1.0 / b.delta_1
}

/// Δ_5 = Pr{X_1c > η_1 X_1, X_1 > Θ_p}
///     = Σ_{t<L_c} Σ_{m≤t} η_1^t e^{−η_1} Γ(m+L_p, β(Θ_p−1)) / (δ_1^{L_p} m! (t−m)! (L_p−1)! β^{m+L_p}).
pub fn delta5(b: &LinkBudget, c: &PathCounts) -> f64 {
    let be = beta(b);
    let x = be * (b.theta_p - 1.0);
    let mut terms = Vec::new();
    for t in 0..c.lc {
        for m in 0..=t {
            let a = (m + c.lp) as f64;
            // integer shape, so the finite-sum branch cannot fail
            let upper = gamma_upper(a, x).unwrap_or(0.0);
            let ln = ln_pow(b.eta_1, t as f64) - b.eta_1 + upper.ln()
                - c.lp as f64 * b.delta_1.ln()
                - lnf(m)
                - lnf(t - m)
                - lnf(c.lp - 1)
                - a * be.ln();
            terms.push(ln.exp());
        }
    }
    sorted_sum(terms)
}

/// η_3 = Θ_p δ_e1 / δ_1 + Θ_p δ_e1 η_1.
fn eta3(b: &LinkBudget) -> f64 {
    b.theta_p * b.delta_e1 / b.delta_1 + b.theta_p * b.delta_e1 * b.eta_1
}

/// Ξ_1 = (1+η_3)^{a_4−a_3} G[(1+η_3)/δ_e2 | 1−a_4; a_3−a_4, 0] / Γ(a_3),
/// equal to ∫₀^∞ w^{a_4−1} e^{−w/δ_e2} (w + 1 + η_3)^{−a_3} dw.
pub fn xi1(b: &LinkBudget, a3: u32, a4: u32) -> Result<f64, SopError> {
    let e3 = eta3(b);
    let g = MeijerG2112::laplace_pattern(a4, a3)?.eval((1.0 + e3) / b.delta_e2)?;
    Ok(((a4 as f64 - a3 as f64) * (1.0 + e3).ln() - ln_gamma(a3 as f64)).exp() * g)
}

/// Σ_{t<L_e1} Δ_6(t) / t!.
pub fn delta6_sum(b: &LinkBudget, c: &PathCounts) -> Result<f64, SopError> {
    let (lc, lp, le1, le2) = (c.lc, c.lp, c.le1, c.le2);
    let (tp, eta1, d1, de1, de2) = (b.theta_p, b.eta_1, b.delta_1, b.delta_e1, b.delta_e2);
    let e3 = eta3(b);
    let z = (1.0 + e3) / de2;
    let mut gs: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut terms = Vec::new();
    for t in 0..le1 {
        for m in 0..lc {
            for n in 0..=m {
                for i in 0..lp {
                    let ln_b2 = ln_pow(tp - 1.0, (lp - 1 - i) as f64)
                        + ln_pow(tp, (m + 1 + i) as f64)
                        + (i + n + 1) as f64 * de1.ln()
                        + ln_pow(eta1, m as f64)
                        - lnf(i)
                        - lnf(lp - 1 - i)
                        - lnf(n)
                        - lnf(m - n)
                        - lp as f64 * d1.ln()
                        - (eta1 * tp + (tp - 1.0) / d1);
                    for j in 0..=t {
                        let (a3, a4) = (t + n + i + 1, j + le2);
                        let g = match gs.get(&(a3, a4)) {
                            Some(&g) => g,
                            None => {
                                let g = MeijerG2112::laplace_pattern(a4, a3)?.eval(z)?;
                                gs.insert((a3, a4), g);
                                g
                            }
                        };
                        let ln_xi1 = (a4 as f64 - a3 as f64) * (1.0 + e3).ln() - ln_gamma(a3 as f64);
                        let ln = ln_b2 + lnf(t + n + i) + lnf(t) + ln_xi1
                            - lnf(j)
                            - lnf(t - j)
                            - le2 as f64 * de2.ln()
                            - lnf(le2 - 1)
                            - lnf(t);
                        terms.push(ln.exp() * g);
                    }
                }
            }
        }
    }
    let v = sorted_sum(terms);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_6" });
    }
    Ok(v)
}

/// B_1 = δ_e1^m (m+L_e1−1)! / (m! (t−m)! (L_e1−1)!), in log form.
fn ln_b1(b: &LinkBudget, c: &PathCounts, t: u32, m: u32) -> f64 {
    m as f64 * b.delta_e1.ln() + lnf(m + c.le1 - 1) - lnf(m) - lnf(t - m) - lnf(c.le1 - 1)
}

/// B_3 = B_1 (L_c−1)! η_1^{L_c−1−n} η_2^{n+1} / (n! (L_c−1−n)!), in log form.
fn ln_b3(b: &LinkBudget, c: &PathCounts, t: u32, m: u32, n: u32) -> f64 {
    ln_b1(b, c, t, m) + lnf(c.lc - 1) + ln_pow(b.eta_1, (c.lc - 1 - n) as f64) + (n + 1) as f64 * b.eta_2.ln()
        - lnf(n)
        - lnf(c.lc - 1 - n)
}

/// Nodes and weights for ∫_{Θ_p−1}^∞ f(λ) e^{−βλ} dλ ≈ Σ w_i f(λ_i).
fn lambda_rule(b: &LinkBudget, order: usize, rule: LambdaRule) -> Result<(Vec<f64>, Vec<f64>, bool), SopError> {
    let be = beta(b);
    let gap = b.theta_p - 1.0;
    match rule {
        LambdaRule::Laguerre => {
            let table = cached_laguerre(order, 0.0)?;
            let scale = (-be * gap).exp() / be;
            Ok((
                table.nodes.iter().map(|x| gap + x / be).collect(),
                table.weights.iter().map(|w| w * scale).collect(),
                false,
            ))
        }
        LambdaRule::Chebyshev => {
            // u = 1/λ on (0, A), A = 1/(Θ_p−1)
            let degenerate = gap < THETA_OFFSET;
            let upper = 1.0 / gap.max(THETA_OFFSET);
            let nodes = chebyshev_b_nodes(order);
            let mut lam = Vec::with_capacity(order);
            let mut w = Vec::with_capacity(order);
            for bi in nodes {
                let u = upper * bi;
                lam.push(1.0 / u);
                w.push(PI / order as f64 * (u * (upper - u)).sqrt() / (u * u) * (-be / u).exp());
            }
            Ok((lam, w, degenerate))
        }
    }
}

/// ΣΣ Δ_7 with the k- and j-sums of Ξ_2 collapsed by the binomial theorem:
/// Σ_k C(L_c,k) λ^{k+L_p−1} = λ^{L_p−1}(1+λ)^{L_c} and
/// Σ_j C(t−m,j) δ_e2^{j+L_e2} t_u^{j+L_e2−1} = δ_e2^{L_e2} t_u^{L_e2−1}(1+δ_e2 t_u)^{t−m}.
/// Every remaining term is positive. Same return convention as [`delta7_sum_expanded`].
pub fn delta7_sum(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<(f64, bool), SopError> {
    let (lc, lp, lec, le1, le2) = (c.lc, c.lp, c.lec, c.le1, c.le2);
    let (eta1, eta2, d1, de1, de2) = (b.eta_1, b.eta_2, b.delta_1, b.delta_e1, b.delta_e2);
    let (lams, lam_w, degenerate) = lambda_rule(b, quad.order_n, quad.lambda_rule)?;
    let tz = cached_laguerre(quad.order_v, 0.0)?;
    let zs: Vec<f64> = lams
        .iter()
        .flat_map(|&lam| tz.nodes.iter().map(move |&tu| (de2 * tu + 1.0 + (1.0 + lam) * eta2) / de1))
        .collect();
    // weight of each (λ, t_u) node without the (1+δ_e2 t_u)^{t−m} factor, and ln of that factor
    let mut base = Vec::with_capacity(zs.len());
    let mut ln_grow = Vec::with_capacity(zs.len());
    for (&lam, &lw) in lams.iter().zip(&lam_w) {
        let ln_lam = ln_pow(lam, (lp - 1) as f64) + lc as f64 * lam.ln_1p();
        for (&tu, &wu) in tz.nodes.iter().zip(&tz.weights) {
            let ln = ln_lam + le2 as f64 * de2.ln() + ln_pow(tu, le2 as f64 - 1.0);
            base.push(lw * wu * ln.exp());
            ln_grow.push((de2 * tu).ln_1p());
        }
    }
    let mut grid = GGrid::new(&zs);
    let mut outer = Vec::new();
    for t in 0..lec {
        for m in 0..=t {
            let big_m = m + le1;
            let grow = (t - m) as f64;
            for n in 0..lc {
                let aa = n + t + 1;
                let gs = grid.values(aa, big_m)?;
                let xi2: CompensatedSum = gs
                    .iter()
                    .zip(&base)
                    .zip(&ln_grow)
                    .map(|((&g, &w), &lg)| g * w * (grow * lg).exp())
                    .collect();
                let ln_pre = ln_b3(b, c, t, m, n) - lp as f64 * d1.ln() - le2 as f64 * de2.ln()
                    - lnf(lc - 1)
                    - lnf(lp - 1)
                    - lnf(le2 - 1)
                    - eta1
                    - aa as f64 * de1.ln()
                    - ln_gamma(big_m as f64);
                outer.push(ln_pre.exp() * xi2.value());
            }
        }
    }
    let v = sorted_sum(outer);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_7" });
    }
    Ok((v, degenerate))
}

/// ΣΣ Δ_7 = Σ_{t<L_ec} Σ_{m≤t} Σ_{n<L_c} B_3 δ_1^{−L_p} δ_e2^{−L_e2} Ξ_2 / ((L_c−1)! (L_p−1)! (L_e2−1)!).
///
/// Ξ_2 carries the ∇_1 λ-integral on `order_n` nodes (rule per `quad.lambda_rule`)
/// and the Laguerre z-integral on `order_v` nodes. Returns the sum and whether
/// the degenerate Θ_p = 1 offset was used.
pub fn delta7_sum_expanded(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<(f64, bool), SopError> {
    let (lc, lp, lec, le1, le2) = (c.lc, c.lp, c.lec, c.le1, c.le2);
    let (eta1, eta2, d1, de1, de2) = (b.eta_1, b.eta_2, b.delta_1, b.delta_e1, b.delta_e2);
    let (lams, lam_w, degenerate) = lambda_rule(b, quad.order_n, quad.lambda_rule)?;
    let tz = cached_laguerre(quad.order_v, 0.0)?;
    let nv = tz.len();
    // G argument on the (λ, t_u) grid, λ-major
    let zs: Vec<f64> = lams
        .iter()
        .flat_map(|&lam| tz.nodes.iter().map(move |&tu| (de2 * tu + 1.0 + (1.0 + lam) * eta2) / de1))
        .collect();
    let mut grid = GGrid::new(&zs);
    let mut outer = Vec::new();
    for t in 0..lec {
        for m in 0..=t {
            let big_m = m + le1;
            for n in 0..lc {
                let aa = n + t + 1;
                let gs = grid.values(aa, big_m)?;
                let mut xi2 = CompensatedSum::default();
                for k in 0..=lc {
                    let ln_k = lnf(lc) - lnf(k) - lnf(lc - k) - eta1 - aa as f64 * de1.ln() - ln_gamma(big_m as f64);
                    for j in 0..=t - m {
                        let ln_j = ln_k + lnf(t - m) - lnf(j) - lnf(t - m - j) + (j + le2) as f64 * de2.ln();
                        for (li, (&lam, &lw)) in lams.iter().zip(&lam_w).enumerate() {
                            let ln_l = ln_j + ln_pow(lam, (k + lp - 1) as f64);
                            let row = &gs[li * nv..(li + 1) * nv];
                            for ((&tu, &wu), &g) in tz.nodes.iter().zip(&tz.weights).zip(row) {
                                let ln = ln_l + ln_pow(tu, (j + le2) as f64 - 1.0);
                                xi2.add(lw * wu * g * ln.exp());
                            }
                        }
                    }
                }
                let ln_pre = ln_b3(b, c, t, m, n) - lp as f64 * d1.ln() - le2 as f64 * de2.ln()
                    - lnf(lc - 1)
                    - lnf(lp - 1)
                    - lnf(le2 - 1);
                outer.push(ln_pre.exp() * xi2.value());
            }
        }
    }
    let v = sorted_sum(outer);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_7" });
    }
    Ok((v, degenerate))
}

/// ΣΣΣ Δ_8 with the i-, j- and q-sums of Ξ_3 collapsed by the binomial theorem.
/// With r = δ_e1 u_v / (δ_e2 s_u + 1 + b_5) they become (1+r)^{L_c},
/// Θ_p^{L_c+1}(Θ_p−1+Θ_p r)^{L_p−1} and δ_e2^{L_e2} s_u^{L_e2−1}(1+δ_e2 s_u)^{k+t−m},
/// leaving a positive double sum per (t, m, k, n).
pub fn delta8_sum(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<f64, SopError> {
    let (lc, lp, lec, le1, le2) = (c.lc, c.lp, c.lec, c.le1, c.le2);
    let (tp, eta1, eta2, d1, de1, de2) = (b.theta_p, b.eta_1, b.eta_2, b.delta_1, b.delta_e1, b.delta_e2);
    let uv = cached_laguerre(quad.order_k, 0.0)?;
    let su = cached_laguerre(quad.order_d, 0.0)?;
    let b5 = de1 * tp * eta1 + de1 * tp / d1;
    let mut zs = Vec::with_capacity(uv.len() * su.len());
    let mut base = Vec::with_capacity(zs.capacity());
    let mut ln_r = Vec::with_capacity(zs.capacity());
    let mut ln_grow = Vec::with_capacity(zs.capacity());
    for (&u, &qv) in uv.nodes.iter().zip(&uv.weights) {
        for (&s, &eu) in su.nodes.iter().zip(&su.weights) {
            let den = de2 * s + 1.0 + b5;
            zs.push(s * de2 / de1 + u * (tp * eta2 - b5) / den + u + (1.0 + tp * eta2) / de1);
            let r = de1 * u / den;
            let ln = lc as f64 * r.ln_1p()
                + ln_pow(tp, (lc + 1) as f64)
                + ln_pow(tp - 1.0 + tp * r, (lp - 1) as f64)
                + (de1 / den).ln()
                + le2 as f64 * de2.ln()
                + ln_pow(s, le2 as f64 - 1.0);
            base.push(qv * eu * ln.exp());
            ln_r.push(r.ln());
            ln_grow.push((de2 * s).ln_1p());
        }
    }
    let mut grid = GGrid::new(&zs);
    let ln_exp = -(tp * eta1 + (tp - 1.0) / d1);
    let mut outer = Vec::new();
    for t in 0..lec {
        for m in 0..=t {
            for k in 0..m + le1 {
                let mk = m + le1 - k;
                let grow = (k + t - m) as f64;
                for n in 0..lc {
                    let aa = n + t + 1;
                    let gs = grid.values(aa, mk)?;
                    let xi3: CompensatedSum = gs
                        .iter()
                        .zip(&base)
                        .zip(ln_r.iter().zip(&ln_grow))
                        .map(|((&g, &w), (&lr, &lg))| g * w * (k as f64 * lr + grow * lg).exp())
                        .collect();
                    let ln_pre = ln_b3(b, c, t, m, n) - lp as f64 * d1.ln() - le2 as f64 * de2.ln()
                        - lnf(k)
                        - lnf(lc - 1)
                        - lnf(lp - 1)
                        - lnf(le2 - 1)
                        + ln_exp
                        - (k + n + t + 1) as f64 * de1.ln()
                        - ln_gamma(mk as f64);
                    outer.push(ln_pre.exp() * xi3.value());
                }
            }
        }
    }
    let v = sorted_sum(outer);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_8" });
    }
    Ok(v)
}

/// ΣΣΣ Δ_8 = Σ_t Σ_m Σ_{k<m+L_e1} Σ_{n<L_c} B_3 δ_1^{−L_p} δ_e2^{−L_e2} Ξ_3 / (k! (L_c−1)! (L_p−1)! (L_e2−1)!),
/// with Ξ_3 on `order_k` (u_v) × `order_d` (s_u) Laguerre nodes.
pub fn delta8_sum_expanded(b: &LinkBudget, c: &PathCounts, quad: &QuadratureSpec) -> Result<f64, SopError> {
    let (lc, lp, lec, le1, le2) = (c.lc, c.lp, c.lec, c.le1, c.le2);
    let (tp, eta1, eta2, d1, de1, de2) = (b.theta_p, b.eta_1, b.eta_2, b.delta_1, b.delta_e1, b.delta_e2);
    let uv = cached_laguerre(quad.order_k, 0.0)?;
    let su = cached_laguerre(quad.order_d, 0.0)?;
    let nd = su.len();
    let b5 = de1 * tp * eta1 + de1 * tp / d1;
    let dens: Vec<f64> = su.nodes.iter().map(|&s| de2 * s + 1.0 + b5).collect();
    // G argument on the (u_v, s_u) grid, u-major
    let zs: Vec<f64> = uv
        .nodes
        .iter()
        .flat_map(|&u| {
            su.nodes
                .iter()
                .zip(&dens)
                .map(move |(&s, &den)| s * de2 / de1 + u * (tp * eta2 - b5) / den + u + (1.0 + tp * eta2) / de1)
        })
        .collect();
    let mut grid = GGrid::new(&zs);
    let ln_exp = -(tp * eta1 + (tp - 1.0) / d1);
    let mut outer = Vec::new();
    for t in 0..lec {
        for m in 0..=t {
            for k in 0..m + le1 {
                let mk = m + le1 - k;
                for n in 0..lc {
                    let aa = n + t + 1;
                    let gs = grid.values(aa, mk)?;
                    let mut xi3 = CompensatedSum::default();
                    for i in 0..=lc {
                        for j in 0..lp {
                            let ln_b5 = lnf(lc) + lnf(lp - 1) + ln_pow(tp, (lc + j + 1) as f64)
                                + ln_pow(tp - 1.0, (lp - 1 - j) as f64)
                                + ln_exp
                                - lnf(i)
                                - lnf(lc - i)
                                - lnf(j)
                                - lnf(lp - 1 - j)
                                - (k + n + t + 1) as f64 * de1.ln()
                                - ln_gamma(mk as f64);
                            let pw = i + j + k;
                            for (vi, (&u, &qv)) in uv.nodes.iter().zip(&uv.weights).enumerate() {
                                let ln_uv = ln_b5 + (pw + 1) as f64 * de1.ln() + ln_pow(u, pw as f64);
                                let row = &gs[vi * nd..(vi + 1) * nd];
                                for q in 0..=k + t - m {
                                    let ln_q = ln_uv + lnf(k + t - m) - lnf(q) - lnf(k + t - m - q)
                                        + (q + le2) as f64 * de2.ln();
                                    for (((&s, &eu), &den), &g) in su.nodes.iter().zip(&su.weights).zip(&dens).zip(row) {
                                        let ln = ln_q - (pw + 1) as f64 * den.ln() + ln_pow(s, (q + le2) as f64 - 1.0);
                                        xi3.add(qv * eu * g * ln.exp());
                                    }
                                }
                            }
                        }
                    }
                    let ln_pre = ln_b3(b, c, t, m, n) - lp as f64 * d1.ln() - le2 as f64 * de2.ln()
                        - lnf(k)
                        - lnf(lc - 1)
                        - lnf(lp - 1)
                        - lnf(le2 - 1);
                    outer.push(ln_pre.exp() * xi3.value());
                }
            }
        }
    }
    let v = sorted_sum(outer);
    if !v.is_finite() {
        return Err(SopError::NonFinite { term: "Delta_8" });
    }
    Ok(v)
}
