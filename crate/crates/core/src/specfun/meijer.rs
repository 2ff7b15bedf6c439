//! Meijer G^{2,1}_{1,2}[z | a1; b1, b2] for real parameters and z > 0.
//!
//! Evaluated as the Mellin–Barnes integral
//! (1/2πi) ∫ Γ(b1+s) Γ(b2+s) Γ(1−a1−s) z^{−s} ds
//! along a vertical line Re s = c that separates the left pole families
//! (−b1−k, −b2−k) from the right family (1−a1+k). The integrand is analytic in
//! a strip around the line, so the trapezoid rule converges geometrically in
//! the step.
//!
//! c sits at the minimum of |integrand| on the real axis, which keeps the
//! oscillating line integral from cancelling far below its terms when the
//! parameters are large. The step comes from the distance to the nearest pole
//! and the growth of the integrand towards the strip edges.
//!
//! The line values only depend on z through z^{−s}, so tables are built lazily
//! per unit bucket of ln z and reused across every z in the bucket.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::gamma::{ln_gamma, ln_gamma_complex};
use super::SpecFunError;

/// |ln z| covered by the cached tables.
const LN_Z_TABLE: f64 = 25.0;
const N_BUCKETS: usize = 2 * LN_Z_TABLE as usize + 1;
/// Target exponent of the discretisation error, e^{−TARGET}.
const TARGET: f64 = 37.0;
/// Relative truncation threshold for the tail of the table.
const TAIL: f64 = 1e-18;
/// Strip half-width as a fraction of the distance to the nearest pole.
const STRIP_FRACTION: f64 = 0.8;
const MAX_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone)]
struct ContourTable {
    c: f64,
    h: f64,
    terms: Vec<Complex64>,
}

/// A Meijer G^{2,1}_{1,2} with fixed parameters, reusable across arguments.
#[derive(Debug, Clone)]
pub struct MeijerG2112 {
    a1: f64,
    b1: f64,
    b2: f64,
    left: f64,
    right: f64,
    tables: Vec<OnceLock<ContourTable>>,
}

impl MeijerG2112 {
    pub fn new(a1: f64, b1: f64, b2: f64) -> Result<Self, SpecFunError> {
        if !(a1.is_finite() && b1.is_finite() && b2.is_finite()) {
            return Err(SpecFunError::UnsupportedPattern(format!(
                "non-finite parameters a1 = {a1}, b1 = {b1}, b2 = {b2}"
            )));
        }
        let left = (-b1).max(-b2);
        let right = 1.0 - a1;
        if right - left <= 1e-9 {
            return Err(SpecFunError::UnsupportedPattern(format!(
                "no contour separates the poles of Γ(b+s) from Γ(1−a1−s) \
                 (a1 = {a1}, b1 = {b1}, b2 = {b2})"
            )));
        }
        let tables = (0..N_BUCKETS).map(|_| OnceLock::new()).collect();
        Ok(Self { a1, b1, b2, left, right, tables })
    }

    /// The pattern G[z | 1−a; M−a, 0] generated by ∫ e^{−zu} u^{a−1} (1+u)^{−M} du.
    pub fn laplace_pattern(a: u32, m: u32) -> Result<Self, SpecFunError> {
        Self::new(1.0 - a as f64, m as f64 - a as f64, 0.0)
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.a1, self.b1, self.b2)
    }

    pub fn eval(&self, z: f64) -> Result<f64, SpecFunError> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(SpecFunError::Domain(format!("Meijer G at z = {z}")));
        }
        let lz = z.ln();
        if lz.abs() <= LN_Z_TABLE {
            let k = lz.round();
            let table = self.tables[(k + LN_Z_TABLE) as usize].get_or_init(|| self.contour(k, 0.5));
            return Ok(sum_table(table, lz));
        }
        if lz > 0.0 {
            if let Some(v) = self.large_z_series(z) {
                return Ok(v);
            }
        }
        Ok(self.eval_direct(z))
    }

    // residues at the right poles s = 1 − a1 + k
    fn large_z_series(&self, z: f64) -> Option<f64> {
        let s0 = 1.0 - self.a1;
        let (p, q) = (self.b1 + s0, self.b2 + s0);
        if p <= 0.0 || q <= 0.0 {
            return None;
        }
        let lz = z.ln();
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        let mut ln_k_fact = 0.0;
        for k in 0..200 {
            let kf = k as f64;
            if k > 0 {
                ln_k_fact += kf.ln();
            }
            let ln_term = ln_gamma(p + kf) + ln_gamma(q + kf) - ln_k_fact - (s0 + kf) * lz;
            let term = ln_term.exp();
            if term > prev {
                return None;
            }
            sum += if k % 2 == 0 { term } else { -term };
            if term <= 1e-16 * sum.abs() {
                return Some(sum);
            }
            prev = term;
        }
        None
    }

    fn eval_direct(&self, z: f64) -> f64 {
        let lz = z.ln();
        sum_table(&self.contour(lz, 0.0), lz)
    }

    /// ln |integrand · z^{−s}| on the real axis.
    fn ln_real(&self, c: f64, lz: f64) -> f64 {
        ln_gamma(self.b1 + c) + ln_gamma(self.b2 + c) + ln_gamma(1.0 - self.a1 - c) - c * lz
    }

    /// Table for ln z within `slack` of `lz`.
    fn contour(&self, lz: f64, slack: f64) -> ContourTable {
        let (left, right) = (self.left, self.right);
        let margin = (0.25 * (right - left)).min(0.5);
        // the real-axis log-magnitude is convex between the pole families
        let (mut lo, mut hi) = (left + margin, right - margin);
        for _ in 0..100 {
            if hi - lo < 1e-6 {
                break;
            }
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if self.ln_real(m1, lz) < self.ln_real(m2, lz) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let c = 0.5 * (lo + hi);
        let d = (STRIP_FRACTION * (c - left).min(right - c)).min(MAX_HALF_WIDTH);
        let centre = self.ln_real(c, lz);
        let growth = [c - d, c + d]
            .iter()
            .map(|&x| self.ln_real(x, lz) + d * slack - centre)
            .fold(0.0f64, f64::max);
        let h = 2.0 * PI * d / (TARGET + growth);
        tabulate(self.a1, self.b1, self.b2, c, h)
    }
}

fn integrand(a1: f64, b1: f64, b2: f64, s: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (ln_gamma_complex(s + b1) + ln_gamma_complex(s + b2) + ln_gamma_complex(one * (1.0 - a1) - s))
        .exp()
}

fn tabulate(a1: f64, b1: f64, b2: f64, c: f64, h: f64) -> ContourTable {
    let mut terms = Vec::with_capacity(512);
    let mut peak = 0.0f64;
    let mut k = 0usize;
    loop {
        let s = Complex64::new(c, k as f64 * h);
        let t = integrand(a1, b1, b2, s);
        let mag = t.norm();
        peak = peak.max(mag);
        terms.push(t);
        // the polynomial prefactor can delay the peak; require some distance
        if (k as f64 * h > 2.0 && mag < TAIL * peak) || k > 20_000 || !mag.is_finite() {
            break;
        }
        k += 1;
    }
    ContourTable { c, h, terms }
}

fn sum_table(table: &ContourTable, lz: f64) -> f64 {
    // z^{−c−iy}: modulus e^{−c ln z}, phase rotated by e^{−i h ln z} per node
    let rot = Complex64::from_polar(1.0, -table.h * lz);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = 0.5 * table.terms[0].re;
    for (k, t) in table.terms.iter().enumerate().skip(1) {
        phase *= rot;
        if k % 64 == 0 {
            // renormalise the recurrence against drift
            phase = Complex64::from_polar(1.0, -(k as f64) * table.h * lz);
        }
        acc += t.re * phase.re - t.im * phase.im;
    }
    table.h / PI * (-table.c * lz).exp() * acc
}

/// One-shot evaluation of G^{2,1}_{1,2}[z | a1; b1, b2].
pub fn meijer_g_2112(z: f64, a1: f64, b1: f64, b2: f64) -> Result<f64, SpecFunError> {
    MeijerG2112::new(a1, b1, b2)?.eval(z)
}
