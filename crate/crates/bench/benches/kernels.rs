use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semisplit::expaction::{exp_action_iterative, exp_action_krylov};
use semisplit::integrators::Stepper;
use semisplit::{exp_dense, ExpBackend, Scheme, SchemeConfig};
use semisplit_bench::{convection_diffusion, fisher_1d, fisher_2d};

fn exp_actions(c: &mut Criterion) {
    let backend = ExpBackend::default();
    let mut g = c.benchmark_group("exp_action");
    for dx in [0.05, 0.025] {
        let p = fisher_2d(dx).unwrap();
        let v = p.initial.clone();
        g.bench_with_input(BenchmarkId::new("chebyshev_fisher2d", p.dim()), &p, |b, p| {
            b.iter(|| exp_action_iterative(&p.linear, 0.01, &v, &backend).unwrap())
        });
    }
    let m = convection_diffusion(2000, 0.3).unwrap();
    let v = vec![1.0; 2000];
    g.bench_function("krylov_convection_2000", |b| b.iter(|| exp_action_krylov(&m, 0.5, &v, &backend).unwrap()));
    let dense = convection_diffusion(150, 0.3).unwrap().to_dense();
    g.bench_function("pade_dense_150", |b| b.iter(|| exp_dense(&dense, 0.5).unwrap()));
    g.finish();
}

fn steps(c: &mut Criterion) {
    let p = fisher_1d().unwrap();
    let u = p.initial.clone();
    let mut g = c.benchmark_group("step_fisher1d");
    for scheme in [
        Scheme::Ab,
        Scheme::Ba,
        Scheme::Strang,
        Scheme::SuccessiveStandard,
        Scheme::SuccessiveMultiA,
        Scheme::SuccessiveMultiB,
    ] {
        let mut stepper = Stepper::new(&p, &SchemeConfig::new(scheme)).unwrap();
        g.bench_function(scheme.label(), |b| b.iter(|| stepper.step(0.0, 0.01, &u).unwrap()));
    }
    g.finish();

    let p2 = fisher_2d(0.05).unwrap();
    let u2 = p2.initial.clone();
    let mut strang = Stepper::new(&p2, &SchemeConfig::new(Scheme::Strang)).unwrap();
    c.bench_function("step_fisher2d_strang", |b| b.iter(|| strang.step(0.0, 0.01, &u2).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = exp_actions, steps
}
criterion_main!(benches);
