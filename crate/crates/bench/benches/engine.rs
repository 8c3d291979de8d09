use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drrsim_bench::bundled;
use drrsim_core::{simulate, Engine, SchedulerPolicy};

fn run_until(c: &mut Criterion) {
    for name in ["two_flow_lossy", "twenty_queue"] {
        let sc = bundled(name);
        let mut group = c.benchmark_group(format!("run_until/{name}"));
        for policy in SchedulerPolicy::ALL {
            group.bench_with_input(BenchmarkId::from_parameter(policy), &policy, |b, &p| {
                b.iter(|| simulate(black_box(&sc), p, 7).0)
            });
        }
        group.finish();
    }
}

fn expand_only(c: &mut Criterion) {
    let sc = bundled("twenty_queue");
    c.bench_function("expand_trace/twenty_queue", |b| {
        b.iter(|| black_box(&sc).expand_trace(7))
    });
}

fn rounds_only(c: &mut Criterion) {
    let sc = bundled("twenty_queue");
    let trace = sc.expand_trace(7);
    c.bench_function("engine_rounds/twenty_queue/odrrsdc", |b| {
        b.iter(|| {
            let mut e = Engine::with_trace(&sc, SchedulerPolicy::OdrrSdc, 7, trace.clone());
            e.run_until(&sc.duration).rounds
        })
    });
}

criterion_group!(benches, run_until, expand_only, rounds_only);
criterion_main!(benches);
