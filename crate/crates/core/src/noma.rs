//! RSMA versus its NOMA special case over the power-split simplex.
//!
//! RSMA minimises the analytic SOP over the grid τ_c + τ_1 + τ_2 = 1; NOMA is
//! the τ_2 = 0 slice (and, for Scenario IV, also the τ_1 = 0 slice). The two
//! argmins are then re-estimated by Monte Carlo when trials are requested.

use rayon::prelude::*;

use crate::analytic::sop;
use crate::mc::{estimate_sop, McEstimate};
use crate::model::{Scenario, SystemConfig};
use crate::quadrature::QuadratureSpec;
use crate::sweep::{point_seed, EveCounts, SweepError};

/// Default simplex step.
pub const DEFAULT_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPoint {
    pub tau_c: f64,
    pub tau_1: f64,
    pub tau_2: f64,
}

/// All (τ_c, τ_1, τ_2) = (i, j, n−i−j)/n with n = 1/step; n must be an integer ≥ 9
/// so each axis carries at least 10 points.
pub fn simplex_grid(step: f64) -> Result<Vec<TauPoint>, SweepError> {
    let n = (1.0 / step).round();
    if !(step > 0.0) || (n * step - 1.0).abs() > 1e-9 || n < 9.0 {
        return Err(SweepError::CoarseGrid(step));
    }
    let n = n as u32;
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            let k = n - i - j;
            pts.push(TauPoint { tau_c: i as f64 / n as f64, tau_1: j as f64 / n as f64, tau_2: k as f64 / n as f64 });
        }
    }
    Ok(pts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMin {
    pub tau: TauPoint,
    pub sop: f64,
    pub mc: Option<McEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NomaComparison {
    pub scenario: Scenario,
    pub rsma: GridMin,
    /// Minimum over the τ_2 = 0 slice.
    pub noma_tau2_zero: GridMin,
    /// Minimum over the τ_1 = 0 slice; Scenario IV only.
    pub noma_tau1_zero: Option<GridMin>,
    /// Grid points whose analytic evaluation failed; excluded from the minima.
    pub failed_points: usize,
}

impl NomaComparison {
    /// The better of the NOMA slices.
    pub fn noma(&self) -> &GridMin {
        match &self.noma_tau1_zero {
            Some(g) if g.sop < self.noma_tau2_zero.sop => g,
            _ => &self.noma_tau2_zero,
        }
    }

    /// RSMA min ≤ NOMA min, checked on the MC estimates (+3 combined SE) when
    /// present and on the analytic grid values otherwise.
    pub fn holds(&self) -> bool {
        let noma = self.noma();
        match (&self.rsma.mc, &noma.mc) {
            (Some(r), Some(n)) => r.sop_hat <= n.sop_hat + 3.0 * r.std_err.hypot(n.std_err),
            _ => self.rsma.sop <= noma.sop,
        }
    }
}

/// Runs the comparison on an explicit τ grid. `mc` = (trials, seed) re-estimates
/// each reported argmin by Monte Carlo.
pub fn noma_baseline_on_grid(
    base: &SystemConfig,
    scenario: Scenario,
    eve_counts: EveCounts,
    grid: &[TauPoint],
    quad: &QuadratureSpec,
    mc: Option<(u64, u64)>,
) -> Result<NomaComparison, SweepError> {
    let at = |t: &TauPoint| SystemConfig { tau_c: t.tau_c, tau_1: t.tau_1, tau_2: t.tau_2, ..base.clone() };
    let sops: Vec<Option<f64>> = grid
        .par_iter()
        .map(|t| {
            let cfg = at(t);
            let eve = eve_counts.layout(scenario, &cfg);
            sop(&cfg, &eve, quad).ok().map(|r| r.sop)
        })
        .collect();
    let failed_points = sops.iter().filter(|s| s.is_none()).count();
    // first minimum in grid order, so ties resolve deterministically
    let argmin = |keep: &dyn Fn(&TauPoint) -> bool| {
        grid.iter()
            .zip(&sops)
            .filter_map(|(t, s)| s.filter(|_| keep(t)).map(|s| (*t, s)))
            .fold(None, |best: Option<(TauPoint, f64)>, (t, s)| match best {
                Some((_, b)) if b <= s => best,
                _ => Some((t, s)),
            })
    };
    let with_mc = |(tau, sop_value): (TauPoint, f64), slot: u64| {
        let mc = match mc {
            Some((trials, seed)) => {
                let cfg = at(&tau);
                let eve = eve_counts.layout(scenario, &cfg);
                estimate_sop(&cfg, &eve, trials, point_seed(seed, slot)).ok()
            }
            None => None,
        };
        GridMin { tau, sop: sop_value, mc }
    };
    let rsma = argmin(&|_| true).ok_or(SweepError::NoValidPoint)?;
    let noma2 = argmin(&|t| t.tau_2 == 0.0).ok_or(SweepError::NoValidPoint)?;
    let noma1 = match scenario {
        Scenario::IV => Some(argmin(&|t| t.tau_1 == 0.0).ok_or(SweepError::NoValidPoint)?),
        _ => None,
    };
    Ok(NomaComparison {
        scenario,
        rsma: with_mc(rsma, 0),
        noma_tau2_zero: with_mc(noma2, 1),
        noma_tau1_zero: noma1.map(|m| with_mc(m, 2)),
        failed_points,
    })
}

/// [`noma_baseline_on_grid`] over [`simplex_grid`]`(step)`.
pub fn noma_baseline(
    base: &SystemConfig,
    scenario: Scenario,
    eve_counts: EveCounts,
    step: f64,
    quad: &QuadratureSpec,
    mc: Option<(u64, u64)>,
) -> Result<NomaComparison, SweepError> {
    noma_baseline_on_grid(base, scenario, eve_counts, &simplex_grid(step)?, quad, mc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_resolution() {
        assert_eq!(simplex_grid(0.1).unwrap().len(), 66);
        assert_eq!(simplex_grid(0.05).unwrap().len(), 231);
        assert!(simplex_grid(0.125).is_err());
        assert!(simplex_grid(0.07).is_err());
        for p in simplex_grid(0.1).unwrap() {
            assert!((p.tau_c + p.tau_1 + p.tau_2 - 1.0).abs() < 1e-12 && p.tau_2 >= 0.0);
        }
    }

    #[test]
    fn noma_only_grid_gives_equal_minima() {
        let grid: Vec<TauPoint> = (0..=10)
            .map(|i| TauPoint { tau_c: i as f64 / 10.0, tau_1: 1.0 - i as f64 / 10.0, tau_2: 0.0 })
            .collect();
        let cfg = SystemConfig::default();
        let r = noma_baseline_on_grid(&cfg, Scenario::II, EveCounts::Caption, &grid, &QuadratureSpec::default(), None)
            .unwrap();
        assert_eq!(r.rsma.sop, r.noma_tau2_zero.sop);
        assert!(r.holds());
    }
}
