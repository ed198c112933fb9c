use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphhypo::bench::fixtures::{dense_path, desk_hypotheses};
use graphhypo::bench::{
    budget_for, generate_graph, run_benchmark, BenchCase, BenchPlan, SamplerTemplate, SynthConfig,
};
use graphhypo::par::Execution;
use graphhypo::{run_sampler, EstimateOptions, SamplerKind, SamplerSpec};

// Replicate batches with the sequential fallback against the rayon pool.
fn sequential_vs_parallel(c: &mut Criterion) {
    let g = generate_graph(&SynthConfig::desk(7).scaled(0.25)).unwrap();
    let cases: Vec<BenchCase> = desk_hypotheses()
        .iter()
        .filter(|h| ["N1", "E1", "P1"].contains(&h.id.as_str()))
        .map(|h| BenchCase::prepare(&g, h, &EstimateOptions::default()).unwrap())
        .collect();
    let samplers = [
        SamplerTemplate::new(SamplerKind::Srw),
        SamplerTemplate::new(SamplerKind::PhaseOpt),
    ];
    let mut group = c.benchmark_group("replicates");
    group.sample_size(10);
    for (name, execution) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel { threads: None }),
    ] {
        let plan = BenchPlan {
            dataset: "desk",
            cases: &cases,
            samplers: &samplers,
            proportions: &[0.05],
            k: 16,
            master_seed: 1,
            path_limit: u64::MAX,
            execution,
        };
        group.bench_function(name, |b| b.iter(|| run_benchmark(&g, &plan)));
    }
    group.finish();
}

fn phase_vs_phase_opt(c: &mut Criterion) {
    let g = generate_graph(&SynthConfig::dense(7)).unwrap();
    let case = BenchCase::prepare(&g, &dense_path(), &EstimateOptions::default()).unwrap();
    let budget = budget_for(&g, 0.10);
    let mut group = c.benchmark_group("dense_sampling");
    for kind in [SamplerKind::Phase, SamplerKind::PhaseOpt] {
        let spec = SamplerSpec::new(kind, budget);
        let mut seed = 0;
        group.bench_function(BenchmarkId::from_parameter(kind), |b| {
            b.iter(|| {
                seed += 1;
                run_sampler(&g, &spec, Some(&case.hypothesis), seed).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sequential_vs_parallel, phase_vs_phase_opt);
criterion_main!(benches);
