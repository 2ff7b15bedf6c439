use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rsma_sop::mc::estimate_sop;
use rsma_sop::specfun::gamma::gamma_upper;
use rsma_sop::{sop, EveLayout, Power, QuadratureSpec, Scenario, SystemConfig};

fn analytic(c: &mut Criterion) {
    let cfg = SystemConfig { tx_power: Power::from_dbm(10.0), ..SystemConfig::default() };
    let quad = QuadratureSpec::default();
    let mut g = c.benchmark_group("analytic_sop");
    g.sample_size(10);
    for s in Scenario::ALL {
        let eve = EveLayout::from_caption(s, &cfg);
        g.bench_with_input(BenchmarkId::from_parameter(s), &eve, |b, eve| b.iter(|| sop(&cfg, eve, &quad).unwrap()));
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = SystemConfig { tx_power: Power::from_dbm(10.0), ..SystemConfig::default() };
    let eve = EveLayout::from_caption(Scenario::III, &cfg);
    let mut g = c.benchmark_group("mc_100k");
    g.sample_size(10);
    g.bench_function("III", |b| b.iter(|| estimate_sop(&cfg, &eve, 100_000, 1).unwrap()));
    g.finish();
}

fn special(c: &mut Criterion) {
    c.bench_function("gamma_upper", |b| b.iter(|| gamma_upper(std::hint::black_box(7.5), std::hint::black_box(3.2))));
}

criterion_group!(benches, analytic, monte_carlo, special);
criterion_main!(benches);
