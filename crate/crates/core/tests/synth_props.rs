use std::collections::BTreeSet;

use asymgraph::synth::{generate, PairKind, SynthConfig, SynthGraph};
use proptest::prelude::*;

fn bytes(s: &SynthGraph) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let (mut e, mut f, mut t) = (Vec::new(), Vec::new(), Vec::new());
    s.write_edges(&mut e).unwrap();
    s.write_features(&mut f).unwrap();
    s.write_ground_truth(&mut t).unwrap();
    (e, f, t)
}

#[test]
fn default_corpus_has_target_shape() {
    for seed in [0, 1] {
        let s = generate(&SynthConfig { seed, ..SynthConfig::default() }).unwrap();
        let st = s.graph.stats();
        assert_eq!(st.num_nodes, 2000);
        assert!((4.0..=10.0).contains(&st.avg_degree), "avg degree {}", st.avg_degree);
        assert!((0.70..=0.85).contains(&st.directed_share), "directed share {}", st.directed_share);
        assert!(s.ground_truth.iter().any(|t| t.2 == PairKind::Transitive));
    }
}

#[test]
fn same_seed_same_bytes() {
    let cfg = SynthConfig {
        num_categories: 6,
        products_per_category: 40,
        seed: 11,
        ..SynthConfig::default()
    };
    let a = bytes(&generate(&cfg).unwrap());
    assert_eq!(a, bytes(&generate(&cfg).unwrap()));
    assert_ne!(a.0, bytes(&generate(&SynthConfig { seed: 12, ..cfg }).unwrap()).0);
}

fn small_config() -> impl Strategy<Value = SynthConfig> {
    (2usize..7, 2usize..25, 0.05f64..0.6, 0.0f64..1.0, 1usize..6, 0.0f64..0.5, 0.0f64..20.0, any::<u64>()).prop_map(
        |(nc, ppc, p, r, clique, hidden, affinity, seed)| SynthConfig {
            num_categories: nc,
            products_per_category: ppc,
            cp_edge_prob: p,
            reciprocal_prob: r,
            cv_clique_size: clique,
            feature_dim: 4,
            unexposed_fraction: hidden,
            affinity,
            seed,
            ..SynthConfig::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planted_structure_is_consistent(cfg in small_config()) {
        let s = generate(&cfg).unwrap();
        let g = &s.graph;
        let ppc = cfg.products_per_category;
        for (u, v) in g.cp_edges() {
            let (cu, cv) = (s.category[u as usize], s.category[v as usize]);
            // main -> accessory, or the reverse of a planted edge
            prop_assert!(s.is_accessory_category[cu] != s.is_accessory_category[cv]);
            prop_assert!(!s.unexposed[u as usize] && !s.unexposed[v as usize]);
        }
        for (u, v) in g.cv_pairs() {
            prop_assert_eq!(u as usize / ppc, v as usize / ppc);
        }
        let planted: BTreeSet<_> = s.ground_truth.iter().filter(|t| t.2 == PairKind::Planted).map(|t| (t.0, t.1)).collect();
        for &(a, b) in &planted {
            prop_assert!(g.has_cp_edge(a, b));
            prop_assert!(!s.is_accessory_category[s.category[a as usize]]);
        }
        for &(a, c, kind) in &s.ground_truth {
            if kind == PairKind::Transitive {
                prop_assert!(a != c && !g.has_cp_edge(a, c));
                prop_assert!(g.cv(c).iter().any(|&b| planted.contains(&(a, b))));
            }
        }
        let mut sorted = s.ground_truth.clone();
        sorted.sort_by_key(|t| (t.2, t.0, t.1));
        prop_assert_eq!(sorted, s.ground_truth.clone());
    }
}
