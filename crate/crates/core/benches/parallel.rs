//! Benchmarks of the data-parallel cores against a single-threaded pool.
//!
//! With the default `parallel` feature the work loops run on rayon; each
//! benchmark here is measured once on a one-thread pool and once on a pool
//! sized to the machine, so the speedup is visible in one report. Compiling
//! with `--no-default-features` removes rayon entirely and benches the
//! sequential fallback code path itself.

use criterion::{criterion_group, criterion_main, Criterion};
use erax_core::channel::ChannelFamily;
use erax_core::decoders::forney_decode;
use erax_core::exponents::{xi_star, GridSpec};
use erax_core::sim::{exact_error_probs, sample_codebook};
use erax_core::tol::DEFAULT_ENUM_BUDGET;

fn xi_cell(fam: &ChannelFamily, grid: &GridSpec) -> f64 {
    xi_star(0.1, 0.05, fam, grid).unwrap().xi
}

fn enumeration(n: usize) -> f64 {
    let ch = erax_core::channel::Dmc::bsc(0.1).unwrap();
    let cb = sample_codebook(n, 8, 2, 7).unwrap();
    let stats = exact_error_probs(
        &cb,
        |y| forney_decode(&cb, y, &ch, 0.05),
        &ch,
        0.05,
        DEFAULT_ENUM_BUDGET,
    )
    .unwrap();
    stats.gamma
}

#[cfg(feature = "parallel")]
fn run_with_pool<F: Fn() -> f64 + Send>(threads: usize, f: F) -> f64 {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(f)
}

fn bench_xi_star(c: &mut Criterion) {
    let thetas: Vec<f64> = (1..=12).map(|i| f64::from(i) * 0.04).collect();
    let fam = ChannelFamily::bsc_grid(&thetas).unwrap();
    let grid = GridSpec::default();
    let mut group = c.benchmark_group("xi_star_cell_12_channels");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        let cores = std::thread::available_parallelism()
            .map(|v| v.get())
            .unwrap_or(4);
        group.bench_function("threads_1", |b| {
            b.iter(|| run_with_pool(1, || xi_cell(&fam, &grid)))
        });
        group.bench_function(format!("threads_{cores}"), |b| {
            b.iter(|| run_with_pool(cores, || xi_cell(&fam, &grid)))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| xi_cell(&fam, &grid)));
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_enumeration_n14");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        let cores = std::thread::available_parallelism()
            .map(|v| v.get())
            .unwrap_or(4);
        group.bench_function("threads_1", |b| {
            b.iter(|| run_with_pool(1, || enumeration(14)))
        });
        group.bench_function(format!("threads_{cores}"), |b| {
            b.iter(|| run_with_pool(cores, || enumeration(14)))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(|| enumeration(14)));
    group.finish();
}

criterion_group!(benches, bench_xi_star, bench_enumeration);
criterion_main!(benches);
