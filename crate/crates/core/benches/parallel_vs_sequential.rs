//! Sequential vs rayon execution of the data-parallel kernels.
//!
//! Without the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sympb::ensemble::{default_t_max, transmission_scan, EnsembleSpec};
use sympb::evolution::{min_projection_area, uniform_grid, ProjectionPlane};
use sympb::geometry::action_volume_mc_with;
use sympb::integrate::{flow_jacobian, EckartMorseSystem};
use sympb::linalg::random_symplectic;
use sympb::models::{
    builtin_eckart_morse_2dof, builtin_eckart_morse_morse_3dof, EckartMorseParams, QuadraticSaddleModel,
};
use sympb::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn mc_volume(c: &mut Criterion) {
    let model = builtin_eckart_morse_morse_3dof();
    let mut g = c.benchmark_group("mc_volume_1e6");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| action_volume_mc_with(&model, black_box(0.0), 1_000_000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn transmission(c: &mut Criterion) {
    let model = builtin_eckart_morse_2dof();
    let spec = EnsembleSpec::with_defaults(&model, 0.0, 2024);
    let xis: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let t_max = default_t_max(&model);
    let mut g = c.benchmark_group("transmission_scan_n5000");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| transmission_scan(&model, &spec, black_box(&xis), t_max, exec).unwrap())
        });
    }
    g.finish();
}

fn projection_grid(c: &mut Criterion) {
    let model = QuadraticSaddleModel::from_cnf(&builtin_eckart_morse_morse_3dof());
    let s = random_symplectic(3, 0.5, 1);
    let mut g = c.benchmark_group("projection_area_grid");
    for points in [600usize, 20_000] {
        let taus = uniform_grid(0.0, 3.0 / model.lambda, points);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, points), &taus, |b, taus| {
                b.iter(|| min_projection_area(&model, 0.2, &s, taus, ProjectionPlane::Saddle, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn fd_jacobian(c: &mut Criterion) {
    let params = EckartMorseParams::default();
    let state = [params.x0 - 2.0, 0.3, -0.2, 1.0, 0.0, 0.0];
    let sys = EckartMorseSystem::new(params, 3).unwrap();
    let mut g = c.benchmark_group("fd_jacobian_t10");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| flow_jacobian(&sys, black_box(&state), 1e-3, 10_000, 1e-6, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mc_volume, transmission, projection_grid, fd_jacobian);
criterion_main!(benches);
