use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use reflap::geometry::SpaceModel;
use reflap::laplacian::{GraphLaplacian, Variant};
use reflap::sampling::{sample_net_with, SamplerConfig, Strategy};
use reflap::spectra::lanczos::{eigen_lanczos, LanczosConfig};
use reflap::Exec;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn rectangle_pipeline(c: &mut Criterion) {
    let space = SpaceModel::rectangle(1.0, 1.0).unwrap();
    let mut cfg = SamplerConfig::new(Strategy::UniformRandom, 3, 0.02);
    cfg.count = Some(4000);
    let net = sample_net_with(&space, &cfg, Exec::Parallel).unwrap();

    let mut group = c.benchmark_group("assemble_rectangle_4000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| GraphLaplacian::build_with(&space, &net, 0.1, Variant::Boundary, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("lanczos_rectangle_4000");
    group.sample_size(10);
    for (name, exec) in MODES {
        let l = GraphLaplacian::build_with(&space, &net, 0.1, Variant::Boundary, exec).unwrap();
        let op = l.to_weighted_symmetric().unwrap();
        let lc = LanczosConfig::new(6);
        group.bench_function(name, |b| b.iter(|| eigen_lanczos(black_box(&op), &lc, exec).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("sample_rectangle_4000");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| sample_net_with(&space, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, rectangle_pipeline);
criterion_main!(benches);
