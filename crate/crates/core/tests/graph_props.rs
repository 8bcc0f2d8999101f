use std::collections::BTreeSet;

use asymgraph::graph::{ingest, keys_from_records, read_edge_records, write_edges, Direction};
use asymgraph::{DirectedProductGraph, KeyMap, NodeId, RelationKind};
use proptest::prelude::*;

fn edges(n: u32, max: usize) -> impl Strategy<Value = Vec<(NodeId, NodeId)>> {
    prop::collection::vec((0..n, 0..n), 0..max)
}

type Edges = Vec<(NodeId, NodeId)>;

fn graph_strategy() -> impl Strategy<Value = (usize, Edges, Edges)> {
    (1u32..30).prop_flat_map(|n| (Just(n as usize), edges(n, 80), edges(n, 40)))
}

proptest! {
    #[test]
    fn adjacency_matches_edge_sets((n, cp, cv) in graph_strategy()) {
        let g = DirectedProductGraph::build(n, &cp, &cv).unwrap();
        let cp_set: BTreeSet<_> = cp.iter().copied().filter(|(u, v)| u != v).collect();
        let cv_set: BTreeSet<_> = cv
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        prop_assert_eq!(g.cp_edges(), cp_set.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(g.cv_pairs(), cv_set.iter().copied().collect::<Vec<_>>());
        for u in 0..n as NodeId {
            prop_assert!(g.cp_out(u).windows(2).all(|w| w[0] < w[1]));
            for &v in g.cp_out(u) {
                prop_assert!(g.cp_in(v).contains(&u));
            }
            for &v in g.cv(u) {
                prop_assert!(g.cv(v).contains(&u));
                prop_assert!(v != u);
            }
            prop_assert_eq!(
                g.neighbors(u, RelationKind::CoView, Direction::In).unwrap(),
                g.neighbors(u, RelationKind::CoView, Direction::Out).unwrap()
            );
        }
    }

    #[test]
    fn stats_follow_definitions((n, cp, cv) in graph_strategy()) {
        let g = DirectedProductGraph::build(n, &cp, &cv).unwrap();
        let s = g.stats();
        let one_way = g.cp_edges().iter().filter(|&&(u, v)| !g.has_cp_edge(v, u)).count();
        prop_assert_eq!(s.one_way_cp_edges, one_way);
        prop_assert_eq!(g.one_way_cp_edges().len(), one_way);
        // Edges per node, counting each co-view pair once.
        let deg = (g.num_cp_edges() + g.num_cv_pairs()) as f64 / n as f64;
        prop_assert!((s.avg_degree - deg).abs() < 1e-12);
        // One-way share among unordered co-purchase pairs.
        let pairs: BTreeSet<_> = g.cp_edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        if !pairs.is_empty() {
            prop_assert!((s.directed_share - one_way as f64 / pairs.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn dump_and_reload_is_byte_identical((n, cp, cv) in graph_strategy()) {
        let g = DirectedProductGraph::build(n, &cp, &cv).unwrap();
        let mut keys = KeyMap::new();
        for i in 0..n {
            keys.intern(&format!("p{i:03}"));
        }
        let mut first = Vec::new();
        write_edges(&mut first, &g, &keys).unwrap();
        let recs = read_edge_records(first.as_slice(), "dump").unwrap();
        let g2 = ingest(&recs, &keys).unwrap();
        let mut second = Vec::new();
        write_edges(&mut second, &g2, &keys).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(g.cp_edges(), g2.cp_edges());
        prop_assert_eq!(g.cv_pairs(), g2.cv_pairs());
    }

    #[test]
    fn induced_subgraph_keeps_only_inner_edges((n, cp, cv) in graph_strategy(), mask_seed in any::<u64>()) {
        let g = DirectedProductGraph::build(n, &cp, &cv).unwrap();
        let keep: Vec<bool> = (0..n).map(|i| (mask_seed >> (i % 64)) & 1 == 1).collect();
        let h = g.induced(&keep);
        let inside = |&(u, v): &(NodeId, NodeId)| keep[u as usize] && keep[v as usize];
        prop_assert_eq!(h.cp_edges(), g.cp_edges().into_iter().filter(inside).collect::<Vec<_>>());
        prop_assert_eq!(h.cv_pairs(), g.cv_pairs().into_iter().filter(inside).collect::<Vec<_>>());
    }
}

#[test]
fn first_appearance_key_order() {
    let text = "b\ta\tcp\n# comment\nc\tb\tcv\n";
    let recs = read_edge_records(text.as_bytes(), "e").unwrap();
    let keys = keys_from_records(&recs);
    assert_eq!(keys.keys(), ["b", "a", "c"]);
    let g = ingest(&recs, &keys).unwrap();
    assert_eq!(g.cp_edges(), vec![(0, 1)]);
    assert_eq!(g.cv_pairs(), vec![(0, 2)]);
}
