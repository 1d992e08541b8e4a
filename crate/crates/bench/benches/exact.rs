use criterion::{criterion_group, criterion_main, Criterion};
use trilab_core::adversary::Deviation;
use trilab_core::analyzer::{check_passive_suite, InputLaw, Options};
use trilab_core::bgw::BgwParams;
use trilab_core::engine::exact::{explore, explore_exhaustive, Observe, Order};
use trilab_core::engine::PartyId;
use trilab_core::hamdist::HamDistParams;
use trilab_core::protocol::Protocol;
use trilab_core::Field;

fn hamdist() -> Protocol {
    Protocol::hamdist(HamDistParams::new(2, Field::prime(3).unwrap()).unwrap())
}

// Same counts two ways: merged walk against one run per tape.
fn walk_vs_runs(c: &mut Criterion) {
    let p = hamdist();
    let starts = InputLaw::Uniform.starts(&p).unwrap();
    let programs = p.honest_programs();
    let observe = Observe { views: [true; 3], capture: Vec::new() };
    let mut group = c.benchmark_group("hamdist_gf3_views");
    group.bench_function("walk", |b| b.iter(|| explore(p.schedule(), &programs, &starts, &observe, Order::Canonical)));
    group.bench_function("exhaustive", |b| {
        b.iter(|| explore_exhaustive(p.schedule(), &programs, &starts, &observe, Order::Canonical, u128::MAX).unwrap())
    });
    group.finish();
}

fn passive_suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("passive_suite");
    group.sample_size(10);
    let bgw = Protocol::bgw(BgwParams::new(2, 2, 5, None).unwrap());
    for (name, p) in [("hamdist_gf3", hamdist()), ("bgw_n2_s2", bgw)] {
        group.bench_function(name, |b| b.iter(|| check_passive_suite(&p, &InputLaw::Uniform, &Options::default())));
    }
    group.finish();
}

fn uniform_share_attack(c: &mut Criterion) {
    let p = Protocol::bgw(BgwParams::new(2, 2, 5, None).unwrap());
    let d = Deviation::uniform_final_share(&p, PartyId::Alice).unwrap();
    let starts = InputLaw::IidBernoulliHalf.starts(&p).unwrap();
    let programs = d.programs(&p);
    c.bench_function("bgw_n2_uniform_share_walk", |b| {
        b.iter(|| explore(p.schedule(), &programs, &starts, &Observe::default(), Order::Canonical))
    });
}

criterion_group!(benches, walk_vs_runs, passive_suites, uniform_share_attack);
criterion_main!(benches);
