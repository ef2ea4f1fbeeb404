use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eqlyap_bench::entry;
use eqlyap_core::dynamics::{integrate, shoot_periodic, Method, PhaseState, ShootOptions, ShootProblem};
use eqlyap_core::repgroup::HKind;
use eqlyap_core::topology::oracle_cohomology_zm;
use eqlyap_core::{analyze, AnalysisConfig, IsotypicalDecomposition};

fn oracle(c: &mut Criterion) {
    let d = IsotypicalDecomposition::new(HKind::Zm(3), 1, &[(1, 1), (1, 1)]).unwrap();
    c.bench_function("oracle Z3 k0=1 R[2,1]", |b| b.iter(|| oracle_cohomology_zm(black_box(&d)).unwrap()));
    let d = IsotypicalDecomposition::new(HKind::Zm(5), 0, &[(2, 1), (2, 2)]).unwrap();
    c.bench_function("oracle Z5 R[2,1]+R[2,2]", |b| b.iter(|| oracle_cohomology_zm(black_box(&d)).unwrap()));
}

fn analysis(c: &mut Criterion) {
    let cfg = AnalysisConfig::default();
    for name in ["ring3d", "harmonic2"] {
        let e = entry(name);
        c.bench_function(&format!("analyze {name}"), |b| {
            b.iter(|| analyze(&e.potential, &e.group, black_box(&e.u0), &e.claim, &cfg).unwrap())
        });
    }
}

fn flow(c: &mut Criterion) {
    let e = entry("ring3d");
    let s0 = PhaseState::new(vec![1.01, 0.0, 0.01], vec![0.0, 1.0, 0.0]);
    for m in [Method::Verlet, Method::Yoshida4] {
        c.bench_function(&format!("integrate ring3d 2048 steps {m:?}"), |b| {
            b.iter(|| integrate(&e.potential, black_box(&s0), 2.0 * PI, 2048, m).unwrap())
        });
    }
}

fn shooting(c: &mut Criterion) {
    let e = entry("ring3d");
    let prob = ShootProblem {
        potential: &e.potential,
        u0: e.u0.clone(),
        direction: vec![1.0, 0.0, 0.0],
        amplitude: Some(0.01),
        slices: vec![vec![0.0, 1.0, 0.0]],
    };
    let guess = PhaseState::at_rest(vec![1.01, 0.0, 0.0]);
    let opts = ShootOptions::default();
    let mut g = c.benchmark_group("shoot");
    g.sample_size(10);
    g.bench_function("ring3d radial a=0.01", |b| {
        b.iter(|| shoot_periodic(&prob, black_box(&guess), 2.0 * PI / 2f64.sqrt(), &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, oracle, analysis, flow, shooting);
criterion_main!(benches);
