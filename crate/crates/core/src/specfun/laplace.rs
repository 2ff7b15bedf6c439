//! Laplace-type integrals ∫₀^∞ e^{−p t} t^q Π (c_i t + 1)^{−r_i} dt.
//!
//! Both public forms go through the same evaluator: substitute x = p t, apply
//! generalised Gauss–Laguerre with α = q at two orders, and fall back to the
//! adaptive integrator when the two disagree (typically when a factor's
//! breakpoint p/c_i sits very close to the origin).

use crate::quadrature::{adaptive_integrate, cached_laguerre, AdaptiveOptions};

use super::gamma::ln_gamma;
use super::SpecFunError;

const HIGH_ORDER: usize = 64;
const LOW_ORDER: usize = 32;
const AGREEMENT: f64 = 1e-12;

/// Parameters of ∫₀^∞ e^{−pt} t^q (ct + 1)^{−r} dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacePowParams {
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub r: f64,
}

/// Parameters of φ(c1, …, c6) = ∫₀^∞ e^{−c1 y} y^{c2} (c3 y + 1)^{−c4} (c5 y + 1)^{−c6} dy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiParams {
    pub c1: f64,
    pub c2: u32,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

pub fn laplace_pow_integral(params: LaplacePowParams) -> Result<f64, SpecFunError> {
    let LaplacePowParams { p, q, c, r } = params;
    if !(q >= 0.0) || !q.is_finite() {
        return Err(SpecFunError::Domain(format!("laplace_pow_integral: q = {q}")));
    }
    laplace_type(p, q, &[(c, r)])
}

pub fn phi_integral(params: PhiParams) -> Result<f64, SpecFunError> {
    let PhiParams { c1, c2, c3, c4, c5, c6 } = params;
    laplace_type(c1, c2 as f64, &[(c3, c4), (c5, c6)])
}

fn laplace_type(rate: f64, power: f64, factors: &[(f64, f64)]) -> Result<f64, SpecFunError> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(SpecFunError::Domain(format!("exponential rate must be positive, got {rate}")));
    }
    for &(scale, exponent) in factors {
        if !(scale >= 0.0 && exponent >= 0.0) || !scale.is_finite() || !exponent.is_finite() {
            return Err(SpecFunError::Domain(format!(
                "shift scale and exponent must be finite and nonnegative, got ({scale}, {exponent})"
            )));
        }
    }
    // x = rate·t; the factors become (scale/rate · x + 1)
    let scaled: Vec<(f64, f64)> = factors
        .iter()
        .filter(|&&(s, e)| s > 0.0 && e > 0.0)
        .map(|&(s, e)| (s / rate, e))
        .collect();
    let ln_prefactor = -(power + 1.0) * rate.ln();
    if scaled.is_empty() {
        return Ok((ln_gamma(power + 1.0) + ln_prefactor).exp());
    }
    let shape = |x: f64| -> f64 { scaled.iter().map(|&(s, e)| -e * (s * x).ln_1p()).sum::<f64>().exp() };

    let rule = |order: usize| -> Result<f64, SpecFunError> {
        let table = cached_laguerre(order, power)
            .map_err(|_| SpecFunError::NonConvergence { what: "Gauss–Laguerre node construction", best: f64::NAN })?;
        Ok(table.iter().map(|(x, w)| w * shape(x)).sum())
    };
    let high = rule(HIGH_ORDER)?;
    let low = rule(LOW_ORDER)?;
    if (high - low).abs() <= AGREEMENT * high.abs() {
        return Ok(high * ln_prefactor.exp());
    }

    // adaptive fallback, split where each factor turns over
    let integrand = |x: f64| -> f64 {
        if x == 0.0 {
            return if power == 0.0 { 1.0 } else { 0.0 };
        }
        (power * x.ln() - x).exp() * shape(x)
    };
    let mut cuts: Vec<f64> = scaled.iter().map(|&(s, _)| 1.0 / s).filter(|b| b.is_finite()).collect();
    cuts.push(power.max(1.0));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let opts = AdaptiveOptions { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 2000 };
    let mut total = 0.0;
    let mut lo = 0.0;
    for &cut in cuts.iter().chain(std::iter::once(&f64::INFINITY)) {
        let piece = adaptive_integrate(&integrand, lo, cut, opts).map_err(|e| match e {
            crate::quadrature::QuadError::BudgetExhausted { best, .. } => {
                SpecFunError::NonConvergence { what: "Laplace-type integral", best: total + best }
            }
            _ => SpecFunError::NonConvergence { what: "Laplace-type integral", best: total },
        })?;
        total += piece.value;
        lo = cut;
    }
    Ok(total * ln_prefactor.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const E_E1_ONE: f64 = 0.596_347_362_323_194_1;

    #[test]
    fn trivial_cases() {
        let lp = |p, q, c, r| laplace_pow_integral(LaplacePowParams { p, q, c, r }).unwrap();
        assert_relative_eq!(lp(1.0, 0.0, 0.0, 3.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(lp(2.0, 3.0, 0.0, 0.0), 0.375, max_relative = 1e-14);
        assert_relative_eq!(lp(1.0, 0.0, 1.0, 1.0), E_E1_ONE, max_relative = 1e-12);
    }

    #[test]
    fn phi_reduces_to_laplace() {
        let phi = |c1, c2, c3, c4, c5, c6| phi_integral(PhiParams { c1, c2, c3, c4, c5, c6 }).unwrap();
        assert_relative_eq!(phi(1.0, 0, 0.0, 2.0, 0.0, 5.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(phi(1.0, 1, 0.0, 2.0, 0.0, 5.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(phi(1.0, 0, 1.0, 1.0, 0.0, 7.0), E_E1_ONE, max_relative = 1e-12);
        let a = phi(0.7, 2, 3.0, 4.0, 0.0, 1.0);
        let b = laplace_pow_integral(LaplacePowParams { p: 0.7, q: 2.0, c: 3.0, r: 4.0 }).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn fallback_path_near_singular_factor() {
        // breakpoint 1e−4 from the origin forces the adaptive path
        let v = laplace_pow_integral(LaplacePowParams { p: 1.0, q: 0.0, c: 1e4, r: 1.0 }).unwrap();
        let reference = crate::quadrature::adaptive_reference(
            |t: f64| (-t).exp() / (1e4 * t + 1.0),
            0.0,
            f64::INFINITY,
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(v, reference, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_rate() {
        assert!(matches!(
            laplace_pow_integral(LaplacePowParams { p: 0.0, q: 0.0, c: 1.0, r: 1.0 }),
            Err(SpecFunError::Domain(_))
        ));
    }
}
