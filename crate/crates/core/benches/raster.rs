use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ivpp_core::builtin::f2d;
use ivpp_core::decomp::{decompose, tiling_2d, Method, RasterSpec, Window};
use ivpp_core::exec::Execution;
use ivpp_core::ivpp2d::IvppBranch2D;

fn raster(c: &mut Criterion) {
    let map = f2d();
    let branch = IvppBranch2D::new(3, 1).unwrap();
    let decomp = decompose(&branch, Method::Analytic).unwrap();
    let branches = [(branch, decomp)];
    let mut group = c.benchmark_group("tiling_2d");
    group.sample_size(10);
    for side in [200usize, 400] {
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let mut spec = RasterSpec::new(Window::square(4.0), side, side);
            spec.exec = exec;
            group.bench_with_input(BenchmarkId::new(name, side), &spec, |b, spec| {
                b.iter(|| tiling_2d(&map, black_box(&branches), spec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, raster);
criterion_main!(benches);
