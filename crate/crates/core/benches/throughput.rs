//! Parallel versus sequential throughput of the hot paths.
//! The sequential runs use the runtime switch, so both share one binary.

use std::hint::black_box;

use asymgraph::model::embed_all;
use asymgraph::par;
use asymgraph::retrieval::{EmbeddingIndex, Filter, QueryMode};
use asymgraph::synth::{generate, SynthConfig};
use asymgraph::trainer::{TrainConfig, Trainer};
use asymgraph::{ModelParams, NodeId};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn bench_embed(c: &mut Criterion) {
    let s = generate(&SynthConfig::default()).unwrap();
    let params = ModelParams::init(s.features.as_matrix().cols(), 64, 3, 0);
    let mut group = c.benchmark_group("embed_all");
    group.sample_size(10);
    for (name, seq) in MODES {
        par::set_force_sequential(seq);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(embed_all(&s.graph, &s.features, &params, 1024).unwrap()))
        });
    }
    par::set_force_sequential(false);
    group.finish();
}

fn bench_train_epoch(c: &mut Criterion) {
    let s = generate(&SynthConfig {
        num_categories: 10,
        ..SynthConfig::default()
    })
    .unwrap();
    let cfg = TrainConfig {
        max_epochs: 1,
        ..TrainConfig::default()
    };
    let trainer = Trainer::new(&s.graph, &s.features, &[], cfg).unwrap();
    let mut group = c.benchmark_group("train_epoch");
    group.sample_size(10);
    for (name, seq) in MODES {
        par::set_force_sequential(seq);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut state = trainer.init_state().unwrap();
                black_box(trainer.run_epoch(&mut state, &mut |_| {}).unwrap())
            })
        });
    }
    par::set_force_sequential(false);
    group.finish();
}

fn bench_retrieval(c: &mut Criterion) {
    let s = generate(&SynthConfig::default()).unwrap();
    let params = ModelParams::init(s.features.as_matrix().cols(), 64, 3, 0);
    let index = EmbeddingIndex::exact(embed_all(&s.graph, &s.features, &params, 1024).unwrap()).unwrap();
    let queries: Vec<NodeId> = (0..index.len() as NodeId).step_by(4).collect();
    let mut group = c.benchmark_group("batch_recommend");
    for (name, seq) in MODES {
        par::set_force_sequential(seq);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(index.batch_recommend(&queries, 10, QueryMode::Related, Filter::None)))
        });
    }
    par::set_force_sequential(false);
    group.finish();
}

criterion_group!(benches, bench_embed, bench_train_epoch, bench_retrieval);
criterion_main!(benches);
