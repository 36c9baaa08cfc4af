//! Component-scoped profiling: attribute energy, wall time, and peak
//! allocation to the five optimization components, then aggregate
//! repeated runs into a mean/std report.
//!
//! Installs the tracking allocator so the peak-allocation column is
//! live; without it those cells read zero.

use samo::profile::{report, Component, Profiler};

#[global_allocator]
static ALLOC: samo::TrackingAllocator = samo::TrackingAllocator;

fn busy(n: u64) -> u64 {
    let mut acc = 0u64;
    for i in 0..n {
        acc = acc.wrapping_add(std::hint::black_box(i)).rotate_left(3);
    }
    std::hint::black_box(acc)
}

fn one_run() -> samo::profile::ProfileTable {
    let mut profiler = Profiler::proxy(50.0, 5.0);
    profiler
        .measure(Component::Initialization, || busy(100_000))
        .unwrap();
    for _ in 0..5 {
        profiler
            .measure(Component::Evaluation, || {
                std::hint::black_box(vec![0u8; 4 << 20]);
                busy(2_000_000)
            })
            .unwrap();
        profiler.measure(Component::Update, || busy(300_000)).unwrap();
    }
    profiler.measure(Component::Training, || busy(5_000_000)).unwrap();
    for _ in 0..20 {
        profiler.measure(Component::Use, || busy(50_000)).unwrap();
    }
    profiler.finish().unwrap()
}

fn main() {
    let tables: Vec<_> = (0..3).map(|_| one_run()).collect();

    println!("single-run breakdown ({:?} backend):", tables[0].source);
    println!("{:<15} {:>10} {:>10} {:>12} {:>6}", "component", "cpu J", "wall s", "peak alloc", "calls");
    for c in &tables[0].components {
        println!(
            "{:<15} {:>10.4} {:>10.4} {:>12} {:>6}",
            c.component.label(),
            c.energy.cpu_joules,
            c.wall_seconds,
            c.peak_alloc_bytes,
            c.call_count
        );
    }
    let total = tables[0].total();
    println!(
        "{:<15} {:>10.4} {:>10.4} {:>12} {:>6}",
        "Total",
        total.energy.cpu_joules,
        total.wall_seconds,
        total.peak_alloc_bytes,
        total.call_count
    );

    let summary = report(&tables).unwrap();
    println!("\nacross {} runs:", summary.runs);
    for metric in &summary.metrics {
        println!(
            "  {:<12} total = {:.4} ± {:.4}",
            metric.metric, metric.total.mean, metric.total.std
        );
    }
}
