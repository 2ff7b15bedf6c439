//! Special functions used by the closed forms.

pub mod gamma;
pub mod laplace;
pub mod meijer;

use thiserror::Error;

pub use gamma::{gain_ccdf, gain_cdf, gain_pdf, gamma_p, gamma_q, gamma_upper, ln_factorial, ln_gamma};
pub use laplace::{laplace_pow_integral, phi_integral, LaplacePowParams, PhiParams};
pub use meijer::{meijer_g_2112, MeijerG2112};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("{what} did not converge (best estimate {best:e})")]
    NonConvergence { what: &'static str, best: f64 },
    #[error("unsupported Meijer G parameter pattern: {0}")]
    UnsupportedPattern(String),
}
