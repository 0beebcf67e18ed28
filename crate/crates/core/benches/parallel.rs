//! Sequential vs parallel execution of the embarrassingly parallel workloads:
//! the mode grid, batched sampling and the oracle sweep.
//!
//! `cargo bench --bench parallel`; build with `--no-default-features` to see
//! both arms fall back to sequential.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nbk::grid::DEFAULT_P_LIST;
use nbk::modes::SearchOptions;
use nbk::par::map_collect;
use nbk::sampler::sample_histogram;
use nbk::{mode_grid, pmf_direct, Execution, GridSpec, LabelledP, Params};

const ARMS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("mode_grid");
    let default = GridSpec::default();
    let wide = GridSpec {
        ks: (2..=6).collect(),
        rs: (2..=6).collect(),
        ps: ["0.3", "0.4"]
            .iter()
            .chain(DEFAULT_P_LIST.iter())
            .map(|p| LabelledP::parse(p).unwrap())
            .collect(),
    };
    for (label, spec) in [("default", &default), ("k,r=2..6 p>=0.3", &wide)] {
        for (arm, execution) in ARMS {
            group.bench_with_input(BenchmarkId::new(arm, label), spec, |b, spec| {
                b.iter(|| mode_grid(black_box(spec), SearchOptions::default(), execution).unwrap())
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_histogram");
    group.sample_size(10);
    let params = Params::from_ratio(2, 2, 1, 2).unwrap();
    let n = 1u64 << 18;
    for (arm, execution) in ARMS {
        group.bench_function(BenchmarkId::new(arm, n), |b| {
            b.iter(|| sample_histogram(&params, black_box(n), 7, execution).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_sweep");
    group.sample_size(10);
    let params = Params::from_ratio(3, 3, 3, 5).unwrap();
    let kr = params.support_min();
    for (arm, execution) in ARMS {
        group.bench_function(BenchmarkId::new(arm, "k=3 r=3 n<=kr+40"), |b| {
            b.iter(|| {
                let ns: Vec<u64> = (kr..=kr + 40).collect();
                map_collect(execution, ns, |n| pmf_direct(&params, n).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, grid, sampling, oracle);
criterion_main!(benches);
