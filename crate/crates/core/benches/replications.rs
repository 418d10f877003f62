use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fou_core::harness::mc::run_mc;
use fou_core::harness::ExperimentSpec;
use fou_core::Backend;

fn spec(replications: usize) -> ExperimentSpec {
    ExperimentSpec::from_toml(&format!(
        r#"
[model]
basis = ["constant", "cos:1", "sin:1"]
mu = [1.0, 0.5, -0.3]
alpha = 0.4
H = 0.7

[grid]
dt = 0.00390625
horizons = [5, 10]

[mc]
replications = {replications}
base_seed = 1
"#
    ))
    .unwrap()
}

fn bench_backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_mc");
    group.sample_size(10);
    for reps in [16, 64] {
        let s = spec(reps);
        group.throughput(Throughput::Elements(reps as u64));
        for (name, backend) in [
            ("sequential", Backend::Sequential),
            ("parallel", Backend::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, reps), &s, |b, s| {
                b.iter(|| run_mc(s, backend).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_backends);
criterion_main!(benches);
