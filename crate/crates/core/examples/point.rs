//! Prints analytic and Monte Carlo SOPs for the four scenarios over the
//! transmit-power grid.
use std::time::Instant;

use rsma_sop::mc::{estimate_sop, estimate_sop_fullvector};
use rsma_sop::{sop, EveLayout, Power, QuadratureSpec, Scenario, SystemConfig};

fn main() {
    for p in [-10.0, 0.0, 10.0, 20.0, 30.0] {
        let cfg = SystemConfig { tx_power: Power::from_dbm(p), ..SystemConfig::default() };
        for s in Scenario::ALL {
            let eve = EveLayout::from_caption(s, &cfg);
            let t = Instant::now();
            let a = sop(&cfg, &eve, &QuadratureSpec::default()).map(|r| r.sop);
            let ta = t.elapsed();
            let t = Instant::now();
            let m = estimate_sop(&cfg, &eve, 1_000_000, 7).unwrap();
            let tm = t.elapsed();
            let t = Instant::now();
            let f = estimate_sop_fullvector(&cfg, &eve, 1_000_000, 8).unwrap();
            let tf = t.elapsed();
            println!(
                "P={p:>5} {s:>3} analytic {a:.6?} ({ta:.2?})  mc {:.6} ± {:.6} ({tm:.2?})  full {:.6} ({tf:.2?})",
                m.sop_hat, m.std_err, f.sop_hat
            );
        }
    }
}
