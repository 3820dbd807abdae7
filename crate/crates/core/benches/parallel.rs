use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hardy_forge::catalog::{self, RunConfig};
use hardy_forge::expr::ParamBindings;
use hardy_forge::hardy::{derive_weight, positivity_scan};
use hardy_forge::par;
use hardy_forge::spectral::verify_inequality;

const MODES: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn scan(c: &mut Criterion) {
    let en = catalog::get_entry("hyperbolic_family", &ParamBindings::new()).unwrap();
    let w = derive_weight(&en.wp);
    let mut g = c.benchmark_group("positivity_scan");
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(BenchmarkId::new(name, 20_000), |b| {
            b.iter(|| positivity_scan(&w, &en.wp.params, &en.wp.dom, 20_000, &en.grid_policy))
        });
    }
    par::set_sequential(false);
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let en = catalog::get_entry("ball_interior", &ParamBindings::new()).unwrap();
    let w = derive_weight(&en.wp);
    let mut g = c.benchmark_group("verify_inequality");
    g.sample_size(10);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(name, |b| b.iter(|| verify_inequality(&en.wp, &w, &en.truncations)));
    }
    par::set_sequential(false);
    g.finish();
}

fn catalog_all(c: &mut Criterion) {
    let entries = catalog::list_entries();
    let cfg = RunConfig::default();
    let mut g = c.benchmark_group("catalog_run_all");
    g.sample_size(10);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        g.bench_function(name, |b| b.iter(|| catalog::run_all(&entries, &cfg)));
    }
    par::set_sequential(false);
    g.finish();
}

criterion_group!(benches, scan, spectrum, catalog_all);
criterion_main!(benches);
