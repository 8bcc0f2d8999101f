use asymgraph::graph::Adjacency;
use asymgraph::sampler::{full_blocks, sample_blocks, sample_negatives, Fanouts, NegativeConfig, Slot};
use asymgraph::{DirectedProductGraph, NodeId};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = DirectedProductGraph> {
    (2u32..25).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 0..120),
            prop::collection::vec((0..n, 0..n), 0..60),
        )
            .prop_map(move |(cp, cv)| DirectedProductGraph::build(n as usize, &cp, &cv).unwrap())
    })
}

proptest! {
    #[test]
    fn sampled_lists_respect_caps_and_adjacency(
        g in graph_strategy(),
        caps in prop::collection::vec(1usize..6, 1..4),
        seed in any::<u64>(),
    ) {
        let n = g.num_nodes() as NodeId;
        let seeds: Vec<NodeId> = (0..n).step_by(2).collect();
        let fanouts = Fanouts::new(caps.clone()).unwrap();
        let blocks = sample_blocks(&g, &seeds, &fanouts, seed);
        prop_assert_eq!(blocks.num_layers(), caps.len());
        prop_assert_eq!(blocks.seeds(), seeds.as_slice());
        for (i, block) in blocks.layers.iter().enumerate() {
            let cap = caps[i];
            if i + 1 < blocks.num_layers() {
                prop_assert_eq!(&block.dst, &blocks.layers[i + 1].src);
            }
            for (row, &u) in block.dst.iter().enumerate() {
                for slot in Slot::ALL {
                    let (kind, dir) = slot.relation();
                    let all = g.neighbors_of(u, kind, dir);
                    let got = block.neighbor_ids(row, slot);
                    prop_assert_eq!(got.len(), all.len().min(cap));
                    prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
                    prop_assert!(got.iter().all(|v| all.contains(v)));
                }
            }
        }
        prop_assert_eq!(&blocks, &sample_blocks(&g, &seeds, &fanouts, seed));
    }

    #[test]
    fn full_blocks_take_every_neighbor(g in graph_strategy(), layers in 1usize..4) {
        let seeds: Vec<NodeId> = (0..g.num_nodes() as NodeId).collect();
        let blocks = full_blocks(&g, &seeds, layers);
        for block in &blocks.layers {
            for (row, &u) in block.dst.iter().enumerate() {
                for slot in Slot::ALL {
                    let (kind, dir) = slot.relation();
                    prop_assert_eq!(block.neighbor_ids(row, slot), g.neighbors_of(u, kind, dir).to_vec());
                }
            }
        }
    }

    #[test]
    fn negatives_are_legal_and_distinct(g in graph_strategy(), seed in any::<u64>(), k in 1usize..4) {
        let pos = g.cp_edges();
        let cfg = NegativeConfig { per_positive: k, exclude_positives: true };
        let negs = sample_negatives(&g, &pos, cfg, seed).unwrap();
        prop_assert_eq!(negs.per_edge.len(), pos.len());
        for (&(u, _), zs) in pos.iter().zip(&negs.per_edge) {
            let legal = g.num_nodes() - 1 - g.cp_out(u).len();
            if legal >= k {
                prop_assert_eq!(zs.len(), k);
                let mut d = zs.clone();
                d.sort_unstable();
                d.dedup();
                prop_assert_eq!(d.len(), k);
            }
            prop_assert!(zs.iter().all(|&z| z != u && !g.has_cp_edge(u, z)));
        }
    }
}

/// Upper 0.1% point of chi-square with `df` degrees of freedom
/// (Wilson-Hilferty approximation).
fn chi2_critical(df: f64) -> f64 {
    let z = 3.090;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

fn chi2_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expect = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum()
}

fn negative_histogram(n: usize, banned: &[NodeId], draws: usize, seed: u64) -> Vec<usize> {
    let cp: Vec<(NodeId, NodeId)> = banned.iter().map(|&v| (0, v)).collect();
    let g = DirectedProductGraph::build(n, &cp, &[]).unwrap();
    let positives = vec![(0, banned[0]); draws];
    let cfg = NegativeConfig {
        per_positive: 1,
        exclude_positives: true,
    };
    let negs = sample_negatives(&g, &positives, cfg, seed).unwrap();
    let mut counts = vec![0usize; n];
    for z in negs.per_edge.iter().flatten() {
        counts[*z as usize] += 1;
    }
    assert_eq!(counts[0], 0);
    for &b in banned {
        assert_eq!(counts[b as usize], 0);
    }
    (0..n)
        .filter(|&z| z != 0 && !banned.contains(&(z as NodeId)))
        .map(|z| counts[z])
        .collect()
}

#[test]
fn negatives_are_uniform_over_legal_nodes() {
    // Few banned nodes exercise rejection sampling, many banned nodes the
    // explicit-candidate path.
    for banned in [vec![1, 2, 3], (1..=12).collect::<Vec<NodeId>>()] {
        let allowed = negative_histogram(20, &banned, 20_000, 17);
        let stat = chi2_uniform(&allowed);
        let crit = chi2_critical((allowed.len() - 1) as f64);
        assert!(stat < crit, "chi2 {stat:.2} >= {crit:.2} with {} banned", banned.len());
    }
}

#[test]
fn chi2_critical_matches_tables() {
    // Tabulated upper 0.1% points.
    assert!((chi2_critical(6.0) - 22.458).abs() < 0.3);
    assert!((chi2_critical(15.0) - 37.697).abs() < 0.3);
}
