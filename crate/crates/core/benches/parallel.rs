use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hwy1::dp::{tsp_exact_td_with, DpOptions};
use hwy1::graph::all_pairs_with;
use hwy1::oracles::{build_corpus, corpus_params, gen_hd1_instance, GeneratorParams};
use hwy1::par::Execution;
use hwy1::spcover::verify_hd1_with;
use hwy1::structure::build_hierarchy;
use hwy1::treedecomp::{build_decomposition, make_nice};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench(c: &mut Criterion) {
    let inst = gen_hd1_instance(&GeneratorParams {
        seed: 5,
        depth: 3,
        branching: (3, 4),
        max_vertices: 40,
        ..GeneratorParams::default()
    })
    .expect("instance");
    let g = inst.graph;
    let h = build_hierarchy(&g, &inst.certificate).expect("hierarchy");
    let ntd = make_nice(&build_decomposition(&g, &h).expect("decomposition"));
    let params = corpus_params(16, 30);

    let mut group = c.benchmark_group("modes");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("all_pairs", name), &exec, |b, &e| {
            b.iter(|| all_pairs_with(&g, e))
        });
        group.bench_with_input(BenchmarkId::new("verify_hd1", name), &exec, |b, &e| {
            b.iter(|| verify_hd1_with(&g, e))
        });
        group.bench_with_input(BenchmarkId::new("tsp_dp", name), &exec, |b, &e| {
            let opts = DpOptions { exec: e, ..DpOptions::default() };
            b.iter(|| tsp_exact_td_with(&g, &ntd, &opts).expect("tour"))
        });
        group.bench_with_input(BenchmarkId::new("corpus", name), &exec, |b, &e| {
            b.iter(|| build_corpus(&params, e).expect("corpus"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
