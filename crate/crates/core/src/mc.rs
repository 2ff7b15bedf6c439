//! Monte Carlo SOP estimator.
//!
//! Trials are split into chunks of [`CHUNK`]; chunk `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `k`, and chunks are
//! reduced as integer failure counts, so the estimate is bit-identical for any
//! number of worker threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    build_eve_paths, build_path_layout, ConfigError, EveLayout, GainRealization, LinkBudget, ModelError, PathCounts,
    SystemConfig,
};

/// Trials per RNG stream.
pub const CHUNK: u64 = 65_536;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("n_trials must be at least 1")]
    ZeroTrials,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub sop_hat: f64,
    pub n_trials: u64,
    /// sqrt(p̂(1 − p̂)/n).
    pub std_err: f64,
    pub seed: u64,
    pub failures: u64,
}

impl McEstimate {
    fn from_counts(failures: u64, n_trials: u64, seed: u64) -> Self {
        let p = failures as f64 / n_trials as f64;
        Self { sop_hat: p, n_trials, std_err: (p * (1.0 - p) / n_trials as f64).sqrt(), seed, failures }
    }
}

/// RNG for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Draws the five squared path-gain norms as unit-scale gamma variates.
#[derive(Debug, Clone)]
pub struct GainSampler {
    // x_1c, x_1p, x_ec, x_ep1, x_ep2; None where the shape is 0
    laws: [Option<Gamma<f64>>; 5],
}

impl GainSampler {
    pub fn new(counts: &PathCounts) -> Self {
        let law = |k: u32| (k > 0).then(|| Gamma::new(k as f64, 1.0).expect("positive integer shape"));
        Self { laws: [counts.lc, counts.lp, counts.lec, counts.le1, counts.le2].map(law) }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GainRealization {
        let mut x = [0.0; 5];
        for (xi, law) in x.iter_mut().zip(&self.laws) {
            if let Some(g) = law {
                *xi = g.sample(rng);
            }
        }
        GainRealization { x_1c: x[0], x_1p: x[1], x_ec: x[2], x_ep1: x[3], x_ep2: x[4] }
    }
}

pub fn sample_gains<R: Rng + ?Sized>(cfg: &SystemConfig, eve: &EveLayout, rng: &mut R) -> GainRealization {
    GainSampler::new(&PathCounts::new(cfg, eve)).sample(rng)
}

/// `init` builds per-chunk scratch state handed to every trial of the chunk.
fn run_chunks<S, I, F>(n_trials: u64, seed: u64, init: I, trial: F) -> Result<McEstimate, McError>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut ChaCha8Rng, &mut S) -> Result<bool, ModelError> + Sync,
{
    if n_trials == 0 {
        return Err(McError::ZeroTrials);
    }
    let n_chunks = n_trials.div_ceil(CHUNK);
    let failures = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK.min(n_trials - k * CHUNK);
            let mut state = init();
            let mut fails = 0u64;
            for _ in 0..len {
                if !trial(&mut rng, &mut state)? {
                    fails += 1;
                }
            }
            Ok::<u64, ModelError>(fails)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate::from_counts(failures, n_trials, seed))
}

/// Norm-level estimator: a trial fails when any scenario-relevant stream
/// misses its secrecy threshold.
pub fn estimate_sop(cfg: &SystemConfig, eve: &EveLayout, n_trials: u64, seed: u64) -> Result<McEstimate, McError> {
    cfg.validate()?;
    eve.validate(cfg)?;
    let budget = LinkBudget::derive(cfg);
    let sampler = GainSampler::new(&PathCounts::new(cfg, eve));
    run_chunks(n_trials, seed, || (), |rng, _| budget.secrecy_ok(eve, &sampler.sample(rng)))
}

/// Column `n` (1-based) of the unitary DFT basis U[m, n] = e^{−2πi(m−1)(n−1)/N_s}/√N_s.
pub fn dft_column(n_antennas: u32, n: u32) -> Vec<Complex64> {
    let ns = n_antennas as f64;
    let k = (n - 1) as f64;
    (0..n_antennas)
        .map(|m| Complex64::from_polar(1.0 / ns.sqrt(), -2.0 * PI * m as f64 * k / ns))
        .collect()
}

/// Full-vector channel model: each link is h = Σ_{n∈Ω} g_n u_n with
/// g_n ~ CN(0, 1); a stream's gain is ‖S(U, Ω_s)^H h‖² over its beamformer
/// columns. Large-scale factors are carried by the link budget.
#[derive(Debug, Clone)]
pub struct FullVectorSampler {
    user_paths: Vec<Vec<Complex64>>,
    eve_paths: Vec<Vec<Complex64>>,
    // beamformer columns: common, U1 private, U2 private
    beams: [Vec<Vec<Complex64>>; 3],
}

impl FullVectorSampler {
    pub fn new(cfg: &SystemConfig, eve: &EveLayout) -> Result<Self, ConfigError> {
        let layout = build_path_layout(cfg)?;
        let eve_paths = build_eve_paths(cfg, &layout, eve)?;
        let cols = |idx: &[u32]| idx.iter().map(|&n| dft_column(cfg.n_antennas, n)).collect::<Vec<_>>();
        Ok(Self {
            user_paths: cols(&layout.omega_1),
            eve_paths: cols(&eve_paths.all()),
            beams: [cols(&layout.omega_c), cols(&layout.omega_1p), cols(&layout.omega_2p)],
        })
    }

    /// Selected beamformer columns, for orthonormality checks.
    pub fn beam_columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.beams.iter().flatten().map(Vec::as_slice)
    }

    fn draw_channel<R: Rng + ?Sized>(paths: &[Vec<Complex64>], rng: &mut R, h: &mut [Complex64]) {
        h.fill(Complex64::new(0.0, 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for u in paths {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let g = Complex64::new(s * re, s * im);
            h.iter_mut().zip(u).for_each(|(hm, um)| *hm += g * um);
        }
    }

    fn beam_gain(beam: &[Vec<Complex64>], h: &[Complex64]) -> f64 {
        beam.iter()
            .map(|w| w.iter().zip(h).map(|(wm, hm)| wm.conj() * hm).sum::<Complex64>().norm_sqr())
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<Complex64>) -> GainRealization {
        let ns = self.user_paths.first().map_or(0, Vec::len);
        scratch.resize(ns, Complex64::new(0.0, 0.0));
        Self::draw_channel(&self.user_paths, rng, scratch);
        let x_1c = Self::beam_gain(&self.beams[0], scratch);
        let x_1p = Self::beam_gain(&self.beams[1], scratch);
        Self::draw_channel(&self.eve_paths, rng, scratch);
        GainRealization {
            x_1c,
            x_1p,
            x_ec: Self::beam_gain(&self.beams[0], scratch),
            x_ep1: Self::beam_gain(&self.beams[1], scratch),
            x_ep2: Self::beam_gain(&self.beams[2], scratch),
        }
    }
}

/// Full-vector estimator. Gains that should vanish come out as rounding-level
/// residues of orthogonal projections; they are zeroed when the path count is 0.
pub fn estimate_sop_fullvector(
    cfg: &SystemConfig,
    eve: &EveLayout,
    n_trials: u64,
    seed: u64,
) -> Result<McEstimate, McError> {
    cfg.validate()?;
    eve.validate(cfg)?;
    let budget = LinkBudget::derive(cfg);
    let sampler = FullVectorSampler::new(cfg, eve)?;
    let c = PathCounts::new(cfg, eve);
    let keep = |k: u32, x: f64| if k == 0 { 0.0 } else { x };
    run_chunks(n_trials, seed, Vec::new, |rng, scratch| {
        let g = sampler.sample(rng, scratch);
        let g = GainRealization {
            x_1c: keep(c.lc, g.x_1c),
            x_1p: keep(c.lp, g.x_1p),
            x_ec: keep(c.lec, g.x_ec),
            x_ep1: keep(c.le1, g.x_ep1),
            x_ep2: keep(c.le2, g.x_ep2),
        };
        budget.secrecy_ok(eve, &g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scenario;

    #[test]
    fn unreachable_rate_always_fails() {
        let cfg = SystemConfig { rate_th_common: 50.0, rate_th_private: 50.0, ..SystemConfig::default() };
        for s in Scenario::ALL {
            let e = estimate_sop(&cfg, &EveLayout::from_caption(s, &cfg), 10_000, 3).unwrap();
            assert_eq!(e.sop_hat, 1.0);
            assert_eq!(e.std_err, 0.0);
        }
    }

    #[test]
    fn no_private_power_fails_scenario_1() {
        let cfg = SystemConfig { tau_1: 0.0, tau_c: 0.5, tau_2: 0.5, ..SystemConfig::default() };
        let e = estimate_sop(&cfg, &EveLayout::from_caption(Scenario::I, &cfg), 5_000, 1).unwrap();
        assert_eq!(e.sop_hat, 1.0);
    }

    #[test]
    fn zero_shape_gains_vanish() {
        let cfg = SystemConfig::default();
        let eve = EveLayout::from_caption(Scenario::IV, &cfg);
        let mut rng = chunk_rng(9, 0);
        for _ in 0..100 {
            assert_eq!(sample_gains(&cfg, &eve, &mut rng).x_ep1, 0.0);
        }
    }

    #[test]
    fn reproducible_and_chunk_aligned() {
        let cfg = SystemConfig::default();
        let eve = EveLayout::from_caption(Scenario::II, &cfg);
        let a = estimate_sop(&cfg, &eve, 3 * CHUNK / 2, 11).unwrap();
        let b = estimate_sop(&cfg, &eve, 3 * CHUNK / 2, 11).unwrap();
        assert_eq!(a, b);
        assert!(matches!(estimate_sop(&cfg, &eve, 0, 1), Err(McError::ZeroTrials)));
    }

    #[test]
    fn beam_columns_orthonormal() {
        let cfg = SystemConfig::default();
        let s = FullVectorSampler::new(&cfg, &EveLayout::from_caption(Scenario::III, &cfg)).unwrap();
        let cols: Vec<_> = s.beam_columns().collect();
        for (i, a) in cols.iter().enumerate() {
            for (j, b) in cols.iter().enumerate() {
                let ip: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-12, "<{i},{j}> = {ip}");
            }
        }
    }
}
