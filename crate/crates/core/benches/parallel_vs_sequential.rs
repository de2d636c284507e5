use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loplab_core::exec::Execution;
use loplab_core::params::{Deformation, ShockParameters};
use loplab_core::scan::{scan_interior_roots, ScanConfig};
use loplab_core::sweep::{sweep, SweepSpec};

const SWEEP: &str = "mach = { start = 0.6, stop = 1.1, step = 0.05 }
ratio = { start = 0.5, stop = 4.0, step = 0.05 }
[F]
f11 = 0.5
f12 = { start = -0.3, stop = 0.3, step = 0.1 }
f22 = 0.5
";

fn bench_sweep(c: &mut Criterion) {
    let spec = SweepSpec::parse(SWEEP).unwrap();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep(&spec, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_interior_scan(c: &mut Criterion) {
    let d = ShockParameters::new(1.0, 3.2, Deformation::new(0.6, 0.3, 0.2, 0.4))
        .unwrap()
        .derive()
        .unwrap();
    let cfg = ScanConfig {
        n_eta: 200,
        n_xi: 400,
        ..ScanConfig::default()
    };
    let mut g = c.benchmark_group("interior_scan");
    g.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| scan_interior_roots(&d, &cfg, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_sweep, bench_interior_scan);
criterion_main!(benches);
