use asymgraph::model::embed_all;
use asymgraph::retrieval::{EmbeddingIndex, Filter, IndexMode, QueryMode, Scored};
use asymgraph::synth::{generate, SynthConfig};
use asymgraph::trainer::{train, TrainConfig};
use asymgraph::{DirectedProductGraph, DualEmbeddings, Matrix, ModelParams, NodeId};
use proptest::prelude::*;

/// Values on a coarse grid so that ties are common.
fn emb_strategy() -> impl Strategy<Value = DualEmbeddings> {
    (1usize..40, 1usize..5).prop_flat_map(|(n, d)| {
        let cell = prop::collection::vec(0u8..4, n * d).prop_map(|v| v.into_iter().map(|x| x as f64 * 0.5).collect::<Vec<_>>());
        (cell.clone(), cell).prop_map(move |(s, t)| {
            DualEmbeddings::new(
                (0..n as NodeId).collect(),
                Matrix::from_vec(n, d, s).unwrap(),
                Matrix::from_vec(n, d, t).unwrap(),
            )
            .unwrap()
        })
    })
}

fn brute_force(
    emb: &DualEmbeddings,
    q: NodeId,
    k: usize,
    mode: QueryMode,
    excluded: impl Fn(NodeId) -> bool,
) -> Vec<Scored> {
    let src = emb.source(q).unwrap();
    if src.iter().all(|&x| x == 0.0) {
        return Vec::new();
    }
    let mut all: Vec<Scored> = (0..emb.len() as NodeId)
        .filter(|&v| !excluded(v))
        .map(|v| {
            let other = match mode {
                QueryMode::Related => emb.target(v).unwrap(),
                QueryMode::Similar => emb.source(v).unwrap(),
            };
            Scored {
                id: v,
                score: src.iter().zip(other).map(|(a, b)| a * b).sum(),
            }
        })
        .collect();
    all.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    all.truncate(k);
    all
}

proptest! {
    #[test]
    fn exact_index_equals_full_scan(emb in emb_strategy(), k in 1usize..50, edges in prop::collection::vec((0u32..40, 0u32..40), 0..60)) {
        let n = emb.len();
        let edges: Vec<_> = edges.into_iter().filter(|&(u, v)| (u as usize) < n && (v as usize) < n).collect();
        let g = DirectedProductGraph::build(n, &edges, &[]).unwrap();
        let index = EmbeddingIndex::exact(emb.clone()).unwrap();
        for q in 0..n as NodeId {
            prop_assert_eq!(index.recommend_related(q, k, Filter::None).unwrap(), brute_force(&emb, q, k, QueryMode::Related, |_| false));
            prop_assert_eq!(index.recommend_similar(q, k, Filter::ExcludeQuery).unwrap(), brute_force(&emb, q, k, QueryMode::Similar, |v| v == q));
            prop_assert_eq!(
                index.recommend_related(q, k, Filter::ExcludeTrainNeighbors(&g)).unwrap(),
                brute_force(&emb, q, k, QueryMode::Related, |v| v == q || g.has_cp_edge(q, v))
            );
        }
        let queries: Vec<NodeId> = (0..n as NodeId).rev().collect();
        let batch = index.batch_recommend(&queries, k, QueryMode::Related, Filter::None);
        for (&q, r) in queries.iter().zip(batch) {
            prop_assert_eq!(r.unwrap(), index.recommend_related(q, k, Filter::None).unwrap());
        }
    }
}

fn recall_at_10(exact: &EmbeddingIndex, approx: &EmbeddingIndex) -> f64 {
    let n = exact.len() as NodeId;
    let (mut hit, mut total) = (0usize, 0usize);
    for q in 0..n {
        let truth = exact.recommend_related(q, 10, Filter::None).unwrap();
        let got = approx.recommend_related(q, 10, Filter::None).unwrap();
        total += truth.len();
        hit += truth.iter().filter(|t| got.iter().any(|g| g.id == t.id)).count();
    }
    hit as f64 / total.max(1) as f64
}

#[test]
fn approximate_index_recall_on_synthetic_corpus() {
    let s = generate(&SynthConfig::default()).unwrap();
    let params = ModelParams::init(s.features.as_matrix().cols(), 64, 3, 1);
    let emb = embed_all(&s.graph, &s.features, &params, 512).unwrap();
    let exact = EmbeddingIndex::exact(emb.clone()).unwrap();
    let approx = EmbeddingIndex::new(emb, IndexMode::Approximate { lists: 32, probes: 8 }, 3).unwrap();
    let recall = recall_at_10(&exact, &approx);
    assert!(recall >= 0.95, "recall@10 {recall:.4}");
}

#[test]
fn trained_scores_are_asymmetric() {
    let s = generate(&SynthConfig {
        num_categories: 6,
        products_per_category: 30,
        ..SynthConfig::default()
    })
    .unwrap();
    let cfg = TrainConfig {
        max_epochs: 2,
        d_h: 16,
        ..TrainConfig::default()
    };
    let out = train(&s.graph, &s.features, &[], &cfg).unwrap();
    let emb = embed_all(&s.graph, &s.features, &out.params, 256).unwrap();
    let index = EmbeddingIndex::exact(emb).unwrap();
    let e = index.embeddings();
    let asym = s
        .graph
        .one_way_cp_edges()
        .into_iter()
        .filter(|&(u, v)| (e.relevance(u, v).unwrap() - e.relevance(v, u).unwrap()).abs() > 1e-9)
        .count();
    assert!(asym > 0);
}
