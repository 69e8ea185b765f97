use std::f64::consts::FRAC_PI_2;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cone_spectra::asymptotics::{geometric_alphas, sweep_with};
use cone_spectra::parallel::Execution;
use cone_spectra::pdevalidate::{minimize_energy_with, MeridianGrid};
use cone_spectra::profile::{profile_for, spacing_for};
use cone_spectra::{Branch, Tolerances};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn sweeps(c: &mut Criterion) {
    let tol = Tolerances::default();
    let alphas = geometric_alphas(1e-4, 1e-2, 32).unwrap();
    let mut g = c.benchmark_group("sweep_32");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep_with(3.0, 3, Branch::Fundamental, &alphas, &tol, exec))
        });
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let tol = Tolerances::default();
    let prof = profile_for(1.0, 2.0, 3, &tol, spacing_for(FRAC_PI_2)).unwrap();
    let grid = MeridianGrid::for_cone(FRAC_PI_2, 64, 3).unwrap();
    let mut g = c.benchmark_group("minimize_energy_64");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| minimize_energy_with(&grid, 1.0, &prof, 2.0, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps, energy);
criterion_main!(benches);
