//! Property tests for the model, special-function and estimator invariants.

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rsma_sop::mc::estimate_sop;
use rsma_sop::model::{build_path_layout, GainRealization, PathCounts};
use rsma_sop::quadrature::{adaptive_integrate, laguerre_nodes, AdaptiveOptions};
use rsma_sop::specfun::{
    gain_cdf, gain_pdf, laplace_pow_integral, ln_gamma, phi_integral, LaplacePowParams, MeijerG2112, PhiParams,
};
use rsma_sop::{sop, EveLayout, LinkBudget, Power, QuadratureSpec, Scenario, SystemConfig};

/// Valid system configurations over wide physical ranges.
fn system() -> impl Strategy<Value = SystemConfig> {
    (
        (3u32..=10).prop_flat_map(|l| (Just(l), 1..l)),
        -20.0f64..40.0,
        (0.0f64..1.0, 0.0f64..1.0),
        (5.0f64..40.0, 10.0f64..60.0),
        (0.0f64..1.0, 0.0f64..1.0),
    )
        .prop_map(|((l, lc), p, (a, b), (r1, re), (rc, rp))| {
            // a, b → point of the simplex with τ_c + τ_1 + τ_2 = 1
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            SystemConfig {
                n_paths: l,
                n_common_paths: lc,
                tx_power: Power::from_dbm(p),
                tau_c: lo,
                tau_1: hi - lo,
                tau_2: 1.0 - hi,
                r_1: r1,
                r_e: re,
                rate_th_common: rc,
                rate_th_private: rp,
                ..SystemConfig::default()
            }
        })
}

/// A valid eavesdropper layout of `scenario` for `cfg`, picked by `u` ∈ [0, 1)^3.
fn layout(scenario: Scenario, cfg: &SystemConfig, u: [f64; 3]) -> EveLayout {
    let (l, lc, lp) = (cfg.n_paths, cfg.n_common_paths, cfg.n_private_paths());
    let pick = |lo: u32, hi: u32, u: f64| lo + ((hi - lo + 1) as f64 * u) as u32;
    match scenario {
        Scenario::I => EveLayout::new(scenario, 0, pick(1, lp, u[0]), 0),
        Scenario::II => EveLayout::new(scenario, pick(1, lc.min(l - lp), u[0]), lp, 0),
        Scenario::III => {
            let le1 = pick(1, lp, u[0]);
            EveLayout::new(scenario, lc, le1, pick(0, lp.min(l - lc - le1), u[1]))
        }
        Scenario::IV => {
            let lec = pick(1, lc, u[0]);
            EveLayout::new(scenario, lec, 0, pick(0, lp.min(l - lec), u[1]))
        }
    }
}

fn gains() -> impl Strategy<Value = GainRealization> {
    prop::array::uniform5(0.0f64..30.0).prop_map(|x| GainRealization {
        x_1c: x[0],
        x_1p: x[1],
        x_ec: x[2],
        x_ep1: x[3],
        x_ep2: x[4],
    })
}

/// `g` with the components the layout has no paths for set to zero.
fn shaped(g: &GainRealization, eve: &EveLayout) -> GainRealization {
    let keep = |x: f64, k: u32| if k == 0 { 0.0 } else { x };
    GainRealization { x_ec: keep(g.x_ec, eve.l_ec), x_ep1: keep(g.x_ep1, eve.l_e1), x_ep2: keep(g.x_ep2, eve.l_e2), ..*g }
}

fn scenario() -> impl Strategy<Value = Scenario> {
    prop::sample::select(Scenario::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sinrs_are_finite_and_nonnegative(cfg in system(), s in scenario(), u in prop::array::uniform3(0.0f64..1.0), g in gains()) {
        let b = LinkBudget::derive(&cfg);
        let eve = layout(s, &cfg, u);
        prop_assert!(eve.validate(&cfg).is_ok());
        let (u1c, u1p) = b.sinr_user(&g);
        let (ec, ep) = b.sinr_eve(&eve, &shaped(&g, &eve)).unwrap();
        for v in [u1c, u1p, ec, ep] {
            prop_assert!(v.is_finite() && v >= 0.0, "{v}");
        }
    }

    #[test]
    fn interference_lowers_eavesdropper_common_sinr(cfg in system(), g in gains(), extra in 0.01f64..30.0) {
        prop_assume!(cfg.n_private_paths() >= 1 && cfg.n_paths > cfg.n_common_paths + 1);
        let b = LinkBudget::derive(&cfg);
        let two = EveLayout::new(Scenario::II, cfg.n_common_paths.min(cfg.n_paths - cfg.n_private_paths()), cfg.n_private_paths(), 0);
        let three = EveLayout::new(Scenario::III, cfg.n_common_paths, 1, 1);
        prop_assume!(two.validate(&cfg).is_ok() && three.validate(&cfg).is_ok());
        let g = GainRealization { x_ep2: extra, ..g };
        let (ec2, _) = b.sinr_eve(&two, &shaped(&g, &two)).unwrap();
        let (ec3, _) = b.sinr_eve(&three, &g).unwrap();
        prop_assert!(ec3 <= ec2, "{ec3} > {ec2}");
    }

    #[test]
    fn path_layout_is_deterministic(cfg in system()) {
        prop_assert_eq!(build_path_layout(&cfg).unwrap(), build_path_layout(&cfg).unwrap());
    }

    #[test]
    fn link_budget_depends_on_snr_only(cfg in system(), scale_db in -30.0f64..30.0, g in gains()) {
        let scaled = SystemConfig {
            tx_power: Power::from_dbm(cfg.tx_power.dbm() + scale_db),
            noise_power: Power::from_dbm(cfg.noise_power.dbm() + scale_db),
            ..cfg.clone()
        };
        let (a, b) = (LinkBudget::derive(&cfg), LinkBudget::derive(&scaled));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        for (x, y) in [(a.delta, b.delta), (a.delta_1c, b.delta_1c), (a.delta_1, b.delta_1), (a.delta_ec, b.delta_ec), (a.delta_e1, b.delta_e1), (a.delta_e2, b.delta_e2)] {
            prop_assert!(close(x, y), "{x} vs {y}");
        }
        let (p, q) = (a.sinr_user(&g), b.sinr_user(&g));
        prop_assert!(close(p.0, q.0) && close(p.1, q.1));
    }

    #[test]
    fn gain_cdf_nondecreasing(kappa in 1u32..30, x in 0.0f64..80.0, dx in 0.0f64..5.0) {
        prop_assert!(gain_cdf(kappa, x).unwrap() <= gain_cdf(kappa, x + dx).unwrap());
    }

    #[test]
    fn phi_monotone(c1 in 0.05f64..5.0, c2 in 0u32..8, c3 in 0.0f64..5.0, c4 in 0.0f64..10.0,
                    c5 in 0.0f64..5.0, c6 in 0.0f64..10.0, which in 0usize..5, bump in 0.01f64..2.0) {
        let base = PhiParams { c1, c2, c3, c4, c5, c6 };
        let mut up = base;
        match which {
            0 => up.c1 += bump,
            1 => up.c3 += bump,
            2 => up.c4 += bump,
            3 => up.c5 += bump,
            _ => up.c6 += bump,
        }
        let (v0, v1) = (phi_integral(base).unwrap(), phi_integral(up).unwrap());
        prop_assert!(v1 <= v0 * (1.0 + 1e-8), "{base:?} → {v0}, {up:?} → {v1}");
    }

    #[test]
    fn meijer_matches_integral(a in 1u32..25, m in 1u32..20, log_z in -2.0f64..3.0) {
        let z = 10f64.powf(log_z);
        let g = MeijerG2112::laplace_pattern(a, m).unwrap().eval(z).unwrap();
        let integrand = |u: f64| (-z * u + (a as f64 - 1.0) * u.ln() - m as f64 * u.ln_1p()).exp();
        let opts = AdaptiveOptions { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 4000 };
        let reference = adaptive_integrate(integrand, 0.0, f64::INFINITY, opts).unwrap().value;
        let via_g = g / ln_gamma(m as f64).exp();
        prop_assert!((via_g - reference).abs() <= 1e-8 * reference.abs(), "{via_g} vs {reference}");
    }
}

proptest! {
    // each case runs all four closed forms
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scp_within_range_before_clamping(cfg in system(), s in scenario(), u in prop::array::uniform3(0.0f64..1.0)) {
        let eve = layout(s, &cfg, u);
        // sop() range-checks the raw SCP against [−1e−9, 1 + 1e−9] and errors outside it
        let r = sop(&cfg, &eve, &QuadratureSpec::default());
        prop_assert!(r.is_ok(), "{cfg:?} {eve:?}: {r:?}");
    }
}

#[test]
fn gain_pdf_integrates_to_one() {
    for kappa in 1..=12u32 {
        let hi = 40.0 + 10.0 * kappa as f64;
        let opts = AdaptiveOptions { rel_tol: 1e-13, abs_tol: 0.0, max_intervals: 4000 };
        let v = adaptive_integrate(|x| gain_pdf(kappa, x).unwrap(), 0.0, hi, opts).unwrap().value;
        assert!((v - 1.0).abs() < 1e-10, "κ = {kappa}: {v}");
    }
}

#[test]
fn laplace_small_c_limit() {
    for (p, q) in [(0.5f64, 0.0f64), (1.0, 2.0), (3.0, 5.0)] {
        let norm = p.powf(q + 1.0) / ln_gamma(q + 1.0).exp();
        let mut prev = f64::INFINITY;
        for c in [1e-2, 1e-4, 1e-6, 1e-8] {
            let dev = (laplace_pow_integral(LaplacePowParams { p, q, c, r: 3.0 }).unwrap() * norm - 1.0).abs();
            assert!(dev <= prev);
            prev = dev;
        }
        assert!(prev < 1e-6);
    }
}

#[test]
fn laguerre_nodes_ordered_and_weights_positive() {
    for order in [1, 2, 5, 20, 64, 100, 200] {
        let t = laguerre_nodes(order).unwrap();
        // w ≈ e^{−x} underflows past x ≈ 745
        let positive = t.nodes.iter().zip(&t.weights).all(|(&x, &w)| w > 0.0 || (w == 0.0 && x > 700.0));
        assert!(positive, "order {order}");
        assert!(t.nodes.windows(2).all(|w| w[0] < w[1]), "order {order}");
    }
}

#[test]
fn mc_is_independent_of_worker_count() {
    let cfg = SystemConfig { tx_power: Power::from_dbm(10.0), ..SystemConfig::default() };
    let eve = EveLayout::from_caption(Scenario::III, &cfg);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_sop(&cfg, &eve, 300_000, 42).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one.sop_hat.to_bits(), run(8).sop_hat.to_bits());
}

#[test]
fn analytic_inside_mc_interval() {
    // 99% interval plus 5e−3 quadrature slack, at least 95% of 200 random configs
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = (system(), scenario(), prop::array::uniform3(0.0f64..1.0));
    let (mut inside, mut total) = (0, 0);
    for i in 0..200u64 {
        let (cfg, s, u) = strategy.new_tree(&mut runner).unwrap().current();
        let eve = layout(s, &cfg, u);
        let a = sop(&cfg, &eve, &QuadratureSpec::default()).unwrap();
        let m = estimate_sop(&cfg, &eve, 100_000, i).unwrap();
        total += 1;
        if (a.sop - m.sop_hat).abs() <= 2.576 * m.std_err + 5e-3 {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total} inside");
}

#[test]
fn path_counts_follow_layout() {
    let cfg = SystemConfig::default();
    let eve = EveLayout::from_caption(Scenario::III, &cfg);
    let c = PathCounts::new(&cfg, &eve);
    assert_eq!((c.lc, c.lp, c.lec, c.le1, c.le2), (4, 4, 4, 1, 3));
}
