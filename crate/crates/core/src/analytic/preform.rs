//! Direct numerical integration of each analytic term in its pre-closed-form
//! shape, used as an oracle for the closed forms.
//!
//! Every function here integrates gamma densities of the path gains with
//! nested adaptive Gauss–Kronrod rules; none of them reuses a series
//! coefficient, Meijer G value or node table of the closed forms. Failures of
//! an inner integral propagate as NaN, which the outer integrator reports as
//! [`QuadError::NonFinite`].

use crate::model::{LinkBudget, PathCounts};
use crate::quadrature::{adaptive_integrate, AdaptiveOptions, QuadError};
use super::{ln_pow, lnf};

/// Relative tolerance of every integration level.
pub const ORACLE_REL_TOL: f64 = 1e-9;

/// Density x^{k−1} e^{−x} / (k−1)! of a unit-scale gamma gain with shape k ≥ 1.
fn pdf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return if k == 1 && x == 0.0 { 1.0 } else { 0.0 };
    }
    ((k - 1) as f64 * x.ln() - x - lnf(k - 1)).exp()
}

/// Q(k, x) = e^{−x} Σ_{s<k} x^s / s!.
fn ccdf(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for s in 1..k {
        term *= x / s as f64;
        sum += term;
    }
    sum * (-x).exp()
}

fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64, QuadError> {
    let opts = AdaptiveOptions { rel_tol: ORACLE_REL_TOL, abs_tol: 1e-300, max_intervals: 2000 };
    adaptive_integrate(f, lo, hi, opts).map(|e| e.value)
}

fn inner<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    integrate(f, lo, hi).unwrap_or(f64::NAN)
}

/// Scenario I: ∫ f_{L_e1}(y) ∫_{A_2 + A_1 y}^∞ f_{L_p}(x) dx dy.
pub fn scenario1_scp(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    integrate(
        |y| pdf(c.le1, y) * inner(|x| pdf(c.lp, x), b.a_2 + b.a_1 * y, f64::INFINITY),
        0.0,
        f64::INFINITY,
    )
}

/// Lower limit of x_1p for X_1 = 1 + δ_1 x_1p > Θ_p (1 + δ_e1 y).
fn private_floor(b: &LinkBudget, y: f64) -> f64 {
    ((b.theta_p * (1.0 + b.delta_e1 * y) - 1.0) / b.delta_1).max(0.0)
}

/// Scenario II, Δ_2 sum: Pr{X_1c > η_1 X_1, X_1 > Θ_p Z}
/// = ∫ f_{L_e1}(y) ∫_{X_1 > Θ_p Z} f_{L_p}(x) Q(L_c, η_1 X_1) dx dy.
pub fn scenario2_delta2(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    integrate(
        |y| {
            pdf(c.le1, y)
                * inner(|x| pdf(c.lp, x) * ccdf(c.lc, b.eta_1 * (1.0 + b.delta_1 * x)), private_floor(b, y), f64::INFINITY)
        },
        0.0,
        f64::INFINITY,
    )
}

/// Scenario II, Δ_3 sum: E[1{X_1c > η_1 X_1, X_1 > Θ_p Z} Q(L_ec, Z (X_1c − η_1 X_1)/(η_2 X_1))],
/// with X_1c = η_1 X_1 + w.
pub fn scenario2_delta3(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    let (eta1, eta2) = (b.eta_1, b.eta_2);
    integrate(
        |y| {
            let z = 1.0 + b.delta_e1 * y;
            let over_x = |x: f64| {
                let x1 = 1.0 + b.delta_1 * x;
                let scale = z / (eta2 * x1);
                pdf(c.lp, x) * inner(|w| pdf(c.lc, eta1 * x1 + w) * ccdf(c.lec, scale * w), 0.0, f64::INFINITY)
            };
            pdf(c.le1, y) * inner(over_x, private_floor(b, y), f64::INFINITY)
        },
        0.0,
        f64::INFINITY,
    )
}

/// x_1p threshold of X_1 > Θ_p.
fn floor_3(b: &LinkBudget) -> f64 {
    ((b.theta_p - 1.0) / b.delta_1).max(0.0)
}

/// Scenario III, Δ_5 = Pr{X_1c > η_1 X_1, X_1 > Θ_p}.
pub fn scenario3_delta5(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    integrate(|x| pdf(c.lp, x) * ccdf(c.lc, b.eta_1 * (1.0 + b.delta_1 * x)), floor_3(b), f64::INFINITY)
}

/// Scenario III, Σ Δ_6 = E[1{X_1c > η_1 X_1, X_1 > Θ_p} Q(L_e1, Y)],
/// Y = (X_1/Θ_p − 1) X_3 / δ_e1, X_3 = 1 + δ_e2 x_ep2.
pub fn scenario3_delta6(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    integrate(
        |v| {
            let x3 = 1.0 + b.delta_e2 * v;
            let over_x = |x: f64| {
                let x1 = 1.0 + b.delta_1 * x;
                let y = (x1 / b.theta_p - 1.0) * x3 / b.delta_e1;
                pdf(c.lp, x) * ccdf(c.lc, b.eta_1 * x1) * ccdf(c.le1, y)
            };
            pdf(c.le2, v) * inner(over_x, floor_3(b), f64::INFINITY)
        },
        0.0,
        f64::INFINITY,
    )
}

/// B_1(t, m) = δ_e1^m (m+L_e1−1)! / (m! (t−m)! (L_e1−1)!).
fn b1(b: &LinkBudget, c: &PathCounts, t: u32, m: u32) -> f64 {
    (m as f64 * b.delta_e1.ln() + lnf(m + c.le1 - 1) - lnf(m) - lnf(t - m) - lnf(c.le1 - 1)).exp()
}

/// Integrates g(x_1, X_3, P) f_{L_c}(x_1c) over x_1c = η_1 X_1 + η_2 X_1 P (P > 0),
/// x_1p > (Θ_p − 1)/δ_1 and x_ep2 > 0 against their gamma densities.
fn scenario3_triple<G: Fn(f64, f64, f64) -> f64>(b: &LinkBudget, c: &PathCounts, g: G) -> Result<f64, QuadError> {
    integrate(
        |v| {
            let x3 = 1.0 + b.delta_e2 * v;
            let over_x = |x: f64| {
                let x1 = 1.0 + b.delta_1 * x;
                let jac = x1 * b.eta_2;
                let over_p = |p: f64| pdf(c.lc, b.eta_1 * x1 + jac * p) * jac * g(x1, x3, p);
                pdf(c.lp, x) * inner(over_p, 0.0, f64::INFINITY)
            };
            pdf(c.le2, v) * inner(over_x, floor_3(b), f64::INFINITY)
        },
        0.0,
        f64::INFINITY,
    )
}

/// Scenario III, ΣΣ Δ_7 = E[1{…} Σ_{t<L_ec} Σ_{m≤t} B_1 X_3^{t−m} P^t e^{−P X_3} (P δ_e1 + 1)^{−(m+L_e1)}],
/// P = (X_1c − η_1 X_1)/(η_2 X_1).
pub fn scenario3_delta7(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    let coef: Vec<(u32, u32, f64)> =
        (0..c.lec).flat_map(|t| (0..=t).map(move |m| (t, m))).map(|(t, m)| (t, m, b1(b, c, t, m))).collect();
    scenario3_triple(b, c, |_, x3, p| {
        let base = (-p * x3).exp();
        let lp1 = (p * b.delta_e1).ln_1p();
        coef.iter()
            .map(|&(t, m, w)| {
                w * base * (((t - m) as f64) * x3.ln() + t as f64 * p.ln() - (m + c.le1) as f64 * lp1).exp()
            })
            .sum()
    })
}

/// Scenario III, ΣΣΣ Δ_8 = E[1{…} Σ_t Σ_m Σ_{k<m+L_e1} B_1 Y^k P^t X_3^{t−m}
/// e^{−(X_1/Θ_p) P X_3 − Y} / (k! (P δ_e1 + 1)^{m+L_e1−k})].
pub fn scenario3_delta8(b: &LinkBudget, c: &PathCounts) -> Result<f64, QuadError> {
    let mut coef = Vec::new();
    for t in 0..c.lec {
        for m in 0..=t {
            for k in 0..m + c.le1 {
                coef.push((t, m, k, b1(b, c, t, m) / (lnf(k)).exp()));
            }
        }
    }
    scenario3_triple(b, c, |x1, x3, p| {
        let y = (x1 / b.theta_p - 1.0) * x3 / b.delta_e1;
        let base = (-(x1 / b.theta_p) * p * x3 - y).exp();
        let (lp1, ly, lp, lx3) = ((p * b.delta_e1).ln_1p(), y.ln(), p.ln(), x3.ln());
        coef.iter()
            .map(|&(t, m, k, w)| {
                let ln = k as f64 * ly + t as f64 * lp + (t - m) as f64 * lx3 - (m + c.le1 - k) as f64 * lp1;
                w * base * ln.exp()
            })
            .sum()
    })
}

/// Ξ_1 = ∫₀^∞ w^{a_4−1} e^{−w/δ_e2} (w + 1 + η_3)^{−a_3} dw.
pub fn scenario3_xi1(b: &LinkBudget, a3: u32, a4: u32) -> Result<f64, QuadError> {
    let e3 = b.theta_p * b.delta_e1 / b.delta_1 + b.theta_p * b.delta_e1 * b.eta_1;
    integrate(
        |w| ((a4 as f64 - 1.0) * w.ln() - w / b.delta_e2 - a3 as f64 * (w + 1.0 + e3).ln()).exp(),
        0.0,
        f64::INFINITY,
    )
}

/// Scenario IV term Δ(t, m, s, n, extra) in its un-expanded form
/// ∫₀^∞ [x^t e^{−x/δ_1c} (δ_1 x/δ_1c + 1)^{−m−L_p}]_{x = Θ_c(1+y) − 1}
///       y^s e^{−y/δ_ec} (δ_e2 y/δ_ec + 1)^{−n−L_e2−extra} dy.
pub fn scenario4_term(b: &LinkBudget, c: &PathCounts, t: u32, m: u32, s: u32, n: u32, extra: u32) -> Result<f64, QuadError> {
    integrate(
        |y| {
            let x = b.theta_c * (1.0 + y) - 1.0;
            (ln_pow(x, t as f64) - x / b.delta_1c - (m + c.lp) as f64 * (b.delta_1 * x / b.delta_1c).ln_1p()
                + ln_pow(y, s as f64)
                - y / b.delta_ec
                - (n + c.le2 + extra) as f64 * (b.delta_e2 * y / b.delta_ec).ln_1p())
            .exp()
        },
        0.0,
        f64::INFINITY,
    )
}

/// Pr{γ_1c > x} = E[Q(L_c, x (δ_1 x_1p + 1)/δ_1c)].
pub fn user_common_ccdf(b: &LinkBudget, c: &PathCounts, x: f64) -> Result<f64, QuadError> {
    if c.lp == 0 || b.delta_1 == 0.0 {
        return Ok(ccdf(c.lc, x / b.delta_1c));
    }
    integrate(|v| pdf(c.lp, v) * ccdf(c.lc, x * (b.delta_1 * v + 1.0) / b.delta_1c), 0.0, f64::INFINITY)
}

/// Scenario IV (Δ_9, Δ_10): ∫ F̄_{γ_1c}(Θ_c(1+y) − 1) f_part(y) dy for the two
/// parts of the eavesdropper density, with F̄ integrated directly.
pub fn scenario4_parts(b: &LinkBudget, c: &PathCounts) -> Result<(f64, f64), QuadError> {
    use super::scenario4::eve_common_pdf_parts;
    let fbar = |y: f64| user_common_ccdf(b, c, b.theta_c * (1.0 + y) - 1.0).unwrap_or(f64::NAN);
    let d9 = integrate(|y| fbar(y) * eve_common_pdf_parts(b, c, y).0, 0.0, f64::INFINITY)?;
    let d10 = integrate(|y| fbar(y) * eve_common_pdf_parts(b, c, y).1, 0.0, f64::INFINITY)?;
    Ok((d9, d10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemConfig;
    use approx::assert_relative_eq;

    #[test]
    fn helpers() {
        assert_relative_eq!(ccdf(1, 2.0), (-2f64).exp());
        assert_relative_eq!(pdf(3, 2.0), 4.0 * (-2f64).exp() / 2.0, max_relative = 1e-14);
        let total = integrate(|x| pdf(4, x), 0.0, f64::INFINITY).unwrap();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn user_ccdf_series_matches_integral() {
        let b = LinkBudget::derive(&SystemConfig::default());
        let c = PathCounts { lc: 4, lp: 4, lec: 2, le1: 0, le2: 4 };
        for x in [0.0, 0.2, 1.5, 6.0] {
            let series = super::super::scenario4::user_common_ccdf(&b, &c, x);
            assert_relative_eq!(series, user_common_ccdf(&b, &c, x).unwrap(), max_relative = 1e-9);
        }
    }

    fn budget(p_dbm: f64) -> LinkBudget {
        LinkBudget::derive(&SystemConfig { tx_power: crate::model::Power::from_dbm(p_dbm), ..SystemConfig::default() })
    }

    #[test]
    fn scenario_1_and_2_terms() {
        let q = crate::quadrature::QuadratureSpec::default();
        for p in [0.0, 20.0] {
            let b = budget(p);
            let c = PathCounts { lc: 4, lp: 4, lec: 2, le1: 3, le2: 0 };
            let closed = super::super::scenario1::closed_sum(b.a_1, b.a_2, c.lp, c.le1);
            assert_relative_eq!(closed, scenario1_scp(&b, &c).unwrap(), max_relative = 1e-8);
            let d2 = super::super::scenario2::delta2_sum(&b, &c);
            assert_relative_eq!(d2, scenario2_delta2(&b, &c).unwrap(), max_relative = 1e-8);
            let d3 = super::super::scenario2::delta3_sum(&b, &c, &q).unwrap();
            assert_relative_eq!(d3, scenario2_delta3(&b, &c).unwrap(), max_relative = 1e-7);
        }
    }

    #[test]
    fn scenario_3_cheap_terms() {
        let b = budget(10.0);
        let c = PathCounts { lc: 4, lp: 4, lec: 4, le1: 1, le2: 3 };
        assert_relative_eq!(super::super::scenario3::delta5(&b, &c), scenario3_delta5(&b, &c).unwrap(), max_relative = 1e-8);
        let s6 = super::super::scenario3::delta6_sum(&b, &c).unwrap();
        assert_relative_eq!(s6, scenario3_delta6(&b, &c).unwrap(), max_relative = 1e-8);
        let xi = super::super::scenario3::xi1(&b, 3, 2).unwrap();
        assert_relative_eq!(xi, scenario3_xi1(&b, 3, 2).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn scenario_4_terms() {
        let b = budget(20.0);
        let c = PathCounts { lc: 4, lp: 4, lec: 2, le1: 0, le2: 4 };
        let (d9, d10) = super::super::scenario4::evaluate(&b, &c).unwrap();
        let (o9, o10) = scenario4_parts(&b, &c).unwrap();
        assert_relative_eq!(d9, o9, max_relative = 1e-8);
        assert_relative_eq!(d10, o10, max_relative = 1e-8);
        let t = super::super::scenario4::inner_term(&b, &c, 3, 1, 1, 0, 1).unwrap();
        assert_relative_eq!(t, scenario4_term(&b, &c, 3, 1, 1, 0, 1).unwrap(), max_relative = 1e-8);
    }
}
