use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use tpm::{embed_all_with, generate_ba, BaSpec, Execution, WalkConfig};

fn embed(c: &mut Criterion) {
    let config = WalkConfig::new(20, 10, 1).unwrap();
    let mut group = c.benchmark_group("embed_all");
    group.sample_size(10);
    for n in [1_000, 10_000] {
        let graph = generate_ba(&BaSpec {
            n,
            alpha: 3,
            seed: 5,
        })
        .unwrap();
        group.throughput(Throughput::Elements(n as u64));
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &graph, |b, g| {
                b.iter(|| embed_all_with(g, &config, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, embed);
criterion_main!(benches);
