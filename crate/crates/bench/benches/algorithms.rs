use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ::omega_pac::automata::{OnTheFlyProduct, ProductMdp};
use ::omega_pac::experiments::{chain, figure1, gridworld};
use ::omega_pac::graph::mec_decomposition;
use ::omega_pac::learner::{omega_pac, LearnerConfig};
use ::omega_pac::random::{random_chain, random_mdp};
use ::omega_pac::recurrence::{exact_recurrence_time, mdp_recurrence_time, MdpRecurrenceMode};
use ::omega_pac::solver::optimal_policy;
use ::omega_pac::{derived_rng, PositionalPolicy};

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimal_policy");
    for n in [10, 50, 200] {
        let m = random_mdp(&mut derived_rng(7, n as u64), n, 4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| optimal_policy(black_box(m))));
    }
    g.finish();
}

fn mecs(c: &mut Criterion) {
    let mut g = c.benchmark_group("mec_decomposition");
    for n in [50, 200] {
        let m = random_mdp(&mut derived_rng(8, n as u64), n, 4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| mec_decomposition(black_box(m))));
    }
    g.finish();
}

fn recurrence(c: &mut Criterion) {
    let fig = figure1::mdp(0.05).induce_chain(&PositionalPolicy(vec![figure1::ACTION_B; 2])).unwrap();
    c.bench_function("recurrence/figure1_p0.05", |b| b.iter(|| exact_recurrence_time(black_box(&fig), 0.01, 1_000_000)));
    let rc = random_chain(&mut derived_rng(9, 0), 8);
    c.bench_function("recurrence/random_chain", |b| b.iter(|| exact_recurrence_time(black_box(&rc), 0.01, 1_000_000)));
    let ch = chain::mdp(8);
    c.bench_function("recurrence/chain_mdp_exhaustive", |b| {
        b.iter(|| mdp_recurrence_time(black_box(&ch), 1.0 / 60.0, 1_000_000, &MdpRecurrenceMode::Exhaustive))
    });
}

fn product(c: &mut Criterion) {
    let (m, aut) = (gridworld::mdp(), gridworld::automaton());
    c.bench_function("product/gridworld_eager", |b| b.iter(|| ProductMdp::build(black_box(&m), &aut).unwrap()));
    c.bench_function("product/gridworld_on_the_fly", |b| {
        b.iter(|| OnTheFlyProduct::new(m.clone(), aut.clone()).unwrap().expand().unwrap())
    });
}

fn learner(c: &mut Criterion) {
    let m = chain::mdp(4);
    let cfg = LearnerConfig::new(0.05, 0.1, 6, 50, 1);
    c.bench_function("learner/chain4_k50", |b| b.iter(|| omega_pac(black_box(&m), &cfg).unwrap()));
}

criterion_group!(benches, solver, mecs, recurrence, product, learner);
criterion_main!(benches);
