//! Gamma family: log-gamma (real and complex), upper incomplete gamma and the
//! Gamma-distributed path-gain law.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::SpecFunError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
const MAX_ITER: usize = 10_000;
const FACT_TABLE_LEN: usize = 171;

/// ln Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx), valid for 0 < x < 0.5
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Principal-branch ln Γ(z) for complex z off the nonpositive real axis.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + acc.ln()
}

fn fact_table() -> &'static [f64; FACT_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; FACT_TABLE_LEN];
        for k in 1..FACT_TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// ln n!
pub fn ln_factorial(n: usize) -> f64 {
    if n < FACT_TABLE_LEN {
        fact_table()[n]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// n! as a float (exact through 20!, +inf past 170!).
pub fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_factorial(n).exp()
    }
}

/// ln C(n, k).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Upper incomplete gamma Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt.
pub fn gamma_upper(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(x >= 0.0) || !a.is_finite() {
        return Err(SpecFunError::Domain(format!("gamma_upper(a = {a}, x = {x})")));
    }
    if x == 0.0 {
        return Ok(ln_gamma(a).exp());
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    // integer shape: finite sum, all terms positive
    if a.fract() == 0.0 && a <= 60.0 {
        let n = a as usize;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..n {
            term *= x / k as f64;
            sum += term;
        }
        return Ok((ln_factorial(n - 1) - x).exp() * sum);
    }
    if x < a + 1.0 {
        let lower = lower_series(a, x)?;
        Ok(ln_gamma(a).exp() - lower)
    } else {
        upper_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(SpecFunError::Domain(format!("gamma_q(a = {a}, x = {x})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p(a, x)?)
    } else {
        let g = upper_fraction_scaled(a, x)?;
        Ok((g.ln() - x + a * x.ln() - ln_gamma(a)).exp())
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(SpecFunError::Domain(format!("gamma_p(a = {a}, x = {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        let s = lower_series_scaled(a, x)?;
        Ok((s.ln() - x + a * x.ln() - ln_gamma(a)).exp())
    } else {
        Ok(1.0 - gamma_q(a, x)?)
    }
}

// Σ x^n / (a(a+1)…(a+n)); γ(a,x) = e^{−x} x^a · this
fn lower_series_scaled(a: f64, x: f64) -> Result<f64, SpecFunError> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            return Ok(sum);
        }
    }
    Err(SpecFunError::NonConvergence { what: "incomplete gamma series", best: sum })
}

fn lower_series(a: f64, x: f64) -> Result<f64, SpecFunError> {
    let s = lower_series_scaled(a, x)?;
    Ok((s.ln() - x + a * x.ln()).exp())
}

// modified Lentz for the continued fraction of Γ(a,x) e^{x} x^{−a}
fn upper_fraction_scaled(a: f64, x: f64) -> Result<f64, SpecFunError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(SpecFunError::NonConvergence { what: "incomplete gamma continued fraction", best: h })
}

fn upper_fraction(a: f64, x: f64) -> Result<f64, SpecFunError> {
    let h = upper_fraction_scaled(a, x)?;
    Ok((h.ln() - x + a * x.ln()).exp())
}

/// Density of a unit-scale Gamma(κ) path gain: e^{−x} x^{κ−1} / Γ(κ).
pub fn gain_pdf(kappa: u32, x: f64) -> Result<f64, SpecFunError> {
    if kappa == 0 {
        return Err(SpecFunError::Domain("gain_pdf: shape 0 has no density".into()));
    }
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain(format!("gain_pdf: x = {x}")));
    }
    if x == 0.0 {
        return Ok(if kappa == 1 { 1.0 } else { 0.0 });
    }
    let k = kappa as f64;
    Ok(((k - 1.0) * x.ln() - x - ln_factorial(kappa as usize - 1)).exp())
}

/// CDF of a unit-scale Gamma(κ) path gain, equal to P(κ, x).
pub fn gain_cdf(kappa: u32, x: f64) -> Result<f64, SpecFunError> {
    if kappa == 0 {
        return Err(SpecFunError::Domain("gain_cdf: shape 0 is a point mass".into()));
    }
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain(format!("gain_cdf: x = {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    gamma_p(kappa as f64, x)
}

/// Complementary CDF Q(κ, x) of the Gamma(κ) gain.
pub fn gain_ccdf(kappa: u32, x: f64) -> Result<f64, SpecFunError> {
    if kappa == 0 {
        return Err(SpecFunError::Domain("gain_ccdf: shape 0 is a point mass".into()));
    }
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain(format!("gain_ccdf: x = {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    gamma_q(kappa as f64, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_integers() {
        for n in 1..30usize {
            assert_relative_eq!(ln_gamma(n as f64 + 1.0), ln_factorial(n), max_relative = 1e-13);
        }
        assert_relative_eq!(ln_gamma(0.5), PI.sqrt().ln(), max_relative = 1e-14);
    }

    #[test]
    fn complex_matches_real() {
        for &x in &[0.3, 0.5, 1.0, 2.5, 7.25, 40.0] {
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            assert_relative_eq!(c.re, ln_gamma(x), max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn complex_recurrence() {
        // ln Γ(z+1) = ln Γ(z) + ln z (mod 2πi)
        let z = Complex64::new(0.75, 9.5);
        let lhs = ln_gamma_complex(z + 1.0);
        let rhs = ln_gamma_complex(z) + z.ln();
        assert!((lhs.re - rhs.re).abs() < 1e-12);
        let dphase = (lhs.im - rhs.im) / (2.0 * PI);
        assert!((dphase - dphase.round()).abs() < 1e-12);
    }

    #[test]
    fn upper_trivial() {
        assert_relative_eq!(gamma_upper(1.0, 2.3).unwrap(), (-2.3f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(gamma_upper(3.0, 0.0).unwrap(), 2.0, max_relative = 1e-14);
        assert!(gamma_upper(0.0, 1.0).is_err());
        assert!(gamma_upper(1.0, -1.0).is_err());
    }

    #[test]
    fn cdf_shape_one() {
        for &x in &[0.0, 0.1, 1.0, 5.0] {
            assert_relative_eq!(gain_cdf(1, x).unwrap(), 1.0 - (-x as f64).exp(), epsilon = 1e-15);
        }
        assert!(gain_cdf(0, 1.0).is_err());
        assert_eq!(gain_cdf(4, 0.0).unwrap(), 0.0);
        assert_relative_eq!(gain_cdf(4, 1e3).unwrap(), 1.0);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(factorial(20), 2_432_902_008_176_640_000.0);
        assert_relative_eq!(ln_binomial(10, 3), 120f64.ln(), max_relative = 1e-14);
    }
}
