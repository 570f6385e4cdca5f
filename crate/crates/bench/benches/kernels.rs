use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heislab_core::flag::{assemble_flag, Kernel3};
use heislab_core::sio::{assemble_sio, op_norm, LineKernel, Truncation};
use heislab_core::{corona, fixtures, kernels, HPoint, KernelSpec};
use std::hint::black_box;

fn kernel_eval(c: &mut Criterion) {
    let pts: Vec<HPoint> = (0..1024)
        .map(|i| {
            let s = i as f64 * 0.01 + 0.1;
            HPoint::new(s.cos() * s, (1.7 * s).sin(), 0.3 * s - 1.0)
        })
        .collect();
    let mut g = c.benchmark_group("kernel_eval");
    for spec in KernelSpec::GOOD {
        g.bench_function(spec.name(), |b| {
            b.iter(|| pts.iter().map(|&p| kernels::eval_unchecked(spec, black_box(p))).sum::<f64>())
        });
    }
    g.finish();
}

fn sio_norm(c: &mut Criterion) {
    let mut g = c.benchmark_group("sio");
    g.sample_size(10);
    for n in [256usize, 512] {
        let line = fixtures::curve("hilbert-line", n).unwrap();
        let graph = fixtures::curve("ilg-sine", n).unwrap();
        g.bench_with_input(BenchmarkId::new("assemble_hilbert", n), &n, |b, _| {
            b.iter(|| assemble_sio(&LineKernel::Hilbert, &line, 1.0 / 32.0, Truncation::Sharp).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("assemble_gradlog_ilg", n), &n, |b, _| {
            b.iter(|| assemble_sio(&KernelSpec::GradLogX, &graph, 1.0 / 32.0, Truncation::Sharp).unwrap())
        });
        let m = assemble_sio(&LineKernel::Hilbert, &line, 1.0 / 32.0, Truncation::Sharp).unwrap();
        g.bench_with_input(BenchmarkId::new("op_norm_power", n), &n, |b, _| b.iter(|| op_norm(&m, true).unwrap()));
    }
    g.finish();
}

fn flag_assembly(c: &mut Criterion) {
    let f = fixtures::flag("abs", (-1.0 / 32.0, 1.0 / 32.0)).unwrap();
    let mut g = c.benchmark_group("flag");
    g.sample_size(10);
    g.bench_function("assemble_32x32", |b| {
        b.iter(|| assemble_flag(&f, Kernel3::parse("grad_norm_x").unwrap(), (32, 32), 0.125).unwrap())
    });
    g.finish();
}

fn corona_build(c: &mut Criterion) {
    let (xs, ys) = fixtures::lipschitz("sine", 8).unwrap();
    let tame = fixtures::tame("sine", 8).unwrap();
    let mut g = c.benchmark_group("corona");
    g.sample_size(20);
    g.bench_function("lipschitz_sine_depth8", |b| b.iter(|| corona::lipschitz_corona(&xs, &ys, 0.5, 8).unwrap()));
    g.bench_function("tame_sine_depth8", |b| b.iter(|| corona::tame_corona(&tame, 0.5, 8).unwrap()));
    g.finish();
}

criterion_group!(benches, kernel_eval, sio_norm, flag_assembly, corona_build);
criterion_main!(benches);
