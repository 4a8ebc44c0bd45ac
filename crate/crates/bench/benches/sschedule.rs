use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use voltsched_bench::family;
use voltsched_core::sschedule::{s_schedule_with, Driver, SScheduleOptions};
use voltsched_core::testkit::Structure;
use voltsched_core::{avr, compute_ranks};

fn sschedule(c: &mut Criterion) {
    let mut group = c.benchmark_group("sschedule");
    group.sample_size(10);
    for structure in Structure::ALL {
        for n in [10_000usize, 100_000, 1_000_000] {
            let jobs = family(n, structure);
            let ranks = compute_ranks(&jobs);
            let speed = avr(&jobs).unwrap();
            group.throughput(Throughput::Elements(n as u64));
            for (name, driver) in [("refined", Driver::Refined), ("basic", Driver::Basic)] {
                let options = SScheduleOptions { driver, trace: false };
                group.bench_with_input(BenchmarkId::new(format!("{structure}/{name}"), n), &n, |b, _| {
                    b.iter(|| s_schedule_with(&jobs, &speed, &ranks, options).unwrap().stats)
                });
            }
        }
    }
    group.finish();
}

criterion_group!(benches, sschedule);
criterion_main!(benches);
