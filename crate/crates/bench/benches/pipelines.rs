//! End-to-end timings of the heavy pipelines: spectral model construction,
//! transforms, coefficient recovery, and the three convolution paths.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use gsp_core::fftpoly::{convolve, fft};
use gsp_core::interp::recover_coeffs;
use gsp_core::{graphs, ConvMethod, Model, Rep, Tolerances, C64};

fn signal(n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|k| (((seed + k as u64) as f64) * 0.7315).sin())
        .collect()
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for &len in &[64usize, 1024, 1000, 4096] {
        let x: Vec<C64> = (0..len)
            .map(|k| C64::new((k as f64).sin(), (k as f64 * 1.3).cos()))
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(len), &x, |b, x| {
            b.iter(|| fft(black_box(x), false))
        });
    }
    group.finish();
}

fn bench_model_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("model_build");
    for &n in &[8usize, 12, 16] {
        let (g, _) = graphs::random_strongly_connected(n, 7, 1e-3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| Model::build(black_box(g), Tolerances::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("recover_coeffs");
    for &n in &[8usize, 12, 16] {
        let (g, _) = graphs::random_strongly_connected(n, 11, 1e-3).unwrap();
        let model = Model::build(&g, Tolerances::default()).unwrap();
        let s = model.signal_real(&signal(n, 5), Rep::VertexS).unwrap();
        let shat = model.to_representation(&s, Rep::SpectrumHat).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &shat, |b, shat| {
            b.iter(|| recover_coeffs(black_box(&model), black_box(shat)).unwrap())
        });
    }
    group.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolve_n12");
    let (g, _) = graphs::random_strongly_connected(12, 3, 1e-3).unwrap();
    let model = Model::build(&g, Tolerances::default()).unwrap();
    let s = model.signal_real(&signal(12, 1), Rep::VertexS).unwrap();
    let t = model.signal_real(&signal(12, 2), Rep::VertexS).unwrap();
    for method in [ConvMethod::Fft, ConvMethod::Matrix, ConvMethod::Spectral] {
        group.bench_function(format!("{method:?}"), |b| {
            b.iter(|| convolve(black_box(&model), &s, &t, method).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_fft,
    bench_model_build,
    bench_recovery,
    bench_convolution
);
criterion_main!(benches);
