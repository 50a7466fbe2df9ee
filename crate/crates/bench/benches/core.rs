use criterion::{black_box, criterion_group, criterion_main, Criterion};

use rrr_core::feedback::next_input_rate;
use rrr_core::fluid::{compose_path_rrr, link_output_rate};
use rrr_core::operating_point::solve_operating_point;
use rrr_core::scenario::{fig3, Fig3Variant};
use rrr_core::{run_scenario, FeedbackFunction, Probability, Rate, RateEstimatorWindow, TcpFluidCurve};

fn fluid(c: &mut Criterion) {
    let (x_in, x_c, cap) = (Rate::new(4e6).unwrap(), Rate::new(9e6).unwrap(), Rate::new(10e6).unwrap());
    c.bench_function("link_output_rate", |b| {
        b.iter(|| link_output_rate(black_box(x_in), black_box(x_c), black_box(cap)).unwrap())
    });
    let ps: Vec<Probability> = (1..=8).map(|i| Probability::new(0.01 * i as f64).unwrap()).collect();
    c.bench_function("compose_path_rrr_8", |b| b.iter(|| compose_path_rrr(black_box(&ps)).unwrap()));
    let fb = FeedbackFunction::tcp_like(0.6e6).unwrap();
    let p = fb.target_rrr(Rate::new(2e6).unwrap());
    c.bench_function("next_input_rate", |b| {
        b.iter(|| next_input_rate(black_box(Rate::new(2e6).unwrap()), black_box(p), cap, Rate::new(1e5).unwrap()).unwrap())
    });
}

fn operating_point(c: &mut Criterion) {
    let curve = TcpFluidCurve::new(1.22, 12_000.0, 0.06).unwrap();
    let fb = FeedbackFunction::tcp_like(0.6e6).unwrap();
    let cap = Rate::new(10e6).unwrap();
    c.bench_function("solve_operating_point", |b| {
        b.iter(|| solve_operating_point(black_box(&curve), black_box(&fb), cap).unwrap())
    });
}

fn estimator(c: &mut Criterion) {
    let mut w = RateEstimatorWindow::new(32, 12_000.0).unwrap();
    let mut id = 0u64;
    c.bench_function("estimator_record_and_estimate", |b| {
        b.iter(|| {
            id += 1;
            let t = id as f64 * 1e-3;
            w.record_packet(t + 0.02, t, id).unwrap();
            black_box(w.estimate_send_clock())
        })
    });
}

fn simulation(c: &mut Criterion) {
    let spec = fig3(Fig3Variant::TcpLike).with_duration(30.0).unwrap();
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("fig3_tcplike_30s", |b| b.iter(|| run_scenario(black_box(&spec), false).unwrap()));
    g.finish();
}

criterion_group!(benches, fluid, operating_point, estimator, simulation);
criterion_main!(benches);
