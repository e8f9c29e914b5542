use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use featurespace::sampling::disk_spiral;
use featurespace::*;
use std::hint::black_box;

fn bench_gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    for n in [16, 64, 256] {
        let pts = disk_spiral(n, 0.9, 0.0, Domain::UNIT_DISK).unwrap();
        let k = KernelExpr::szego();
        group.bench_with_input(BenchmarkId::new("szego", n), &pts, |b, pts| {
            b.iter(|| gram(black_box(&k), pts, 1).unwrap())
        });
    }
    group.finish();
}

fn bench_psd(c: &mut Criterion) {
    let mut group = c.benchmark_group("psd_check");
    for n in [16, 64, 256] {
        let pts = disk_spiral(n, 0.9, 0.0, Domain::UNIT_DISK).unwrap();
        let g = gram(&KernelExpr::bergman(), &pts, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("bergman", n), &g, |b, g| {
            b.iter(|| psd_check(black_box(g), DEFAULT_PSD_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

fn bench_ifs(c: &mut Criterion) {
    let mut group = c.benchmark_group("ifs");
    for depth in [2, 5, 8] {
        let f = IfsFunction::unit(depth).unwrap();
        group.bench_with_input(BenchmarkId::new("eval", depth), &f, |b, f| {
            b.iter(|| (0..1000).map(|i| ifs_eval(f, black_box(i as f64 / 999.0))).sum::<f64>())
        });
    }
    let k = IfsKernel::new(SeriesKernel::szego(), 4, 64).unwrap();
    group.bench_function("kernel_eval_depth4", |b| b.iter(|| k.eval(black_box(0.1), black_box(0.7))));
    group.finish();
}

fn bench_gaussian(c: &mut Criterion) {
    let pts = disk_spiral(10, 0.9, 0.0, Domain::UNIT_DISK).unwrap();
    let s = SeriesKernel::szego();
    let n = s.auto_truncation(0.9, 1e-12).unwrap();
    let mut group = c.benchmark_group("gaussian");
    group.sample_size(10);
    group.bench_function("10pts_1e4", |b| b.iter(|| gaussian_feature(&s, &pts, black_box(10_000), 7, n).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_gram, bench_psd, bench_ifs, bench_gaussian);
criterion_main!(benches);
