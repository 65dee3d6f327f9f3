use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use relstab_bench::{burgers_shock, euler_shock, mhd_two_shock, segment_states, step_grid};
use relstab_core::criteria::{check_h1, check_h2, sample_sigma_surface, H2Options, SurfaceOptions};
use relstab_core::entropy::{rel_eta, rel_q};
use relstab_core::sim::{run_contraction_experiment, step, Perturbation, SimOptions};
use relstab_core::wave_curves::trace_hugoniot;

fn relative_quantities(c: &mut Criterion) {
    let mut group = c.benchmark_group("relative");
    for (name, s) in [("euler", euler_shock(0.5)), ("mhd", mhd_two_shock(0.5))] {
        let pts = segment_states(&s, 64);
        group.bench_function(format!("{name}_eta_q"), |b| {
            b.iter(|| {
                pts.iter()
                    .map(|u| rel_eta(s.model(), black_box(u), &s.u_l) + rel_q(s.model(), u, &s.u_r))
                    .sum::<f64>()
            })
        });
        group.bench_function(format!("{name}_d_sm"), |b| b.iter(|| pts.iter().map(|u| s.d_sm(black_box(u))).sum::<f64>()));
    }
    group.finish();
}

fn curves(c: &mut Criterion) {
    let s = euler_shock(0.5);
    c.bench_function("euler_hugoniot_trace", |b| b.iter(|| trace_hugoniot(s.model(), black_box(&s.u_l), 1, 1.0, 0.02).unwrap()));
    let m = mhd_two_shock(0.5);
    c.bench_function("mhd_hugoniot_trace", |b| b.iter(|| trace_hugoniot(m.model(), black_box(&m.u_l), 2, 0.3, 0.01).unwrap()));
}

fn criteria(c: &mut Criterion) {
    let mut group = c.benchmark_group("criteria");
    group.sample_size(10);
    let s = euler_shock(0.5);
    let opts = SurfaceOptions { n_rays: 60, ..SurfaceOptions::default() };
    group.bench_function("euler_surface", |b| b.iter(|| sample_sigma_surface(&s, black_box(&opts), None).unwrap()));
    let surf = sample_sigma_surface(&s, &opts, None).unwrap();
    group.bench_function("euler_h1", |b| b.iter(|| check_h1(&s, black_box(&surf)).unwrap()));
    group.bench_function("euler_h2", |b| b.iter(|| check_h2(&s, black_box(&surf), &H2Options::default()).unwrap()));
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation");
    let s = euler_shock(0.5);
    let grid = step_grid(&s, 400);
    let dt = 0.4 * grid.dx / grid.max_wave_speed(s.model()).unwrap();
    group.bench_function("euler_step_400", |b| b.iter(|| step(black_box(&grid), s.model(), dt).unwrap()));
    group.sample_size(10);
    let opts = SimOptions {
        t_final: 0.2,
        perturbation: Perturbation::Bump { center: -0.6, half_width: 0.3, amplitude: vec![0.3] },
        ..SimOptions::default()
    };
    let b0 = burgers_shock(1.0);
    group.bench_function("burgers_experiment_400", |b| b.iter(|| run_contraction_experiment(&b0, black_box(&opts)).unwrap()));
    group.finish();
}

criterion_group!(benches, relative_quantities, curves, criteria, simulation);
criterion_main!(benches);
