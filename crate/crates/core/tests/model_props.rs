use asymgraph::linalg::norm;
use asymgraph::model::embed_all;
use asymgraph::optim::{Adam, AdamConfig};
use asymgraph::{DirectedProductGraph, FeatureMatrix, Matrix, ModelParams, NodeId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug)]
struct Case {
    n: usize,
    cp: Vec<(NodeId, NodeId)>,
    cv: Vec<(NodeId, NodeId)>,
    feats: Vec<Vec<f64>>,
}

fn case_strategy() -> impl Strategy<Value = Case> {
    (2usize..18).prop_flat_map(|n| {
        let id = 0..n as NodeId;
        (
            prop::collection::vec((id.clone(), id.clone()), 0..50),
            prop::collection::vec((id.clone(), id), 0..25),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), n),
        )
            .prop_map(move |(cp, cv, feats)| Case { n, cp, cv, feats })
    })
}

fn features(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embeddings_ignore_batch_size(c in case_strategy(), layers in 1usize..4, b in 1usize..7) {
        let g = DirectedProductGraph::build(c.n, &c.cp, &c.cv).unwrap();
        let f = features(&c.feats);
        let p = ModelParams::init(3, 4, layers, 5);
        let whole = embed_all(&g, &f, &p, c.n).unwrap();
        let chunked = embed_all(&g, &f, &p, b).unwrap();
        prop_assert_eq!(whole.theta_s.as_slice(), chunked.theta_s.as_slice());
        prop_assert_eq!(whole.theta_t.as_slice(), chunked.theta_t.as_slice());
        for i in 0..c.n {
            for row in [whole.theta_s.row(i), whole.theta_t.row(i)] {
                let r = norm(row);
                prop_assert!(r == 0.0 || (r - 1.0).abs() < 1e-12);
                prop_assert!(row.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn relabeling_nodes_permutes_embeddings(c in case_strategy(), layers in 1usize..4, shift in 1usize..17) {
        let n = c.n;
        // pi(v) = (v * a + shift) mod n with a coprime to n
        let a = (1..n).rev().find(|a| gcd(*a, n) == 1).unwrap_or(1);
        let pi = |v: NodeId| ((v as usize * a + shift) % n) as NodeId;
        let g = DirectedProductGraph::build(n, &c.cp, &c.cv).unwrap();
        let cp2: Vec<_> = c.cp.iter().map(|&(u, v)| (pi(u), pi(v))).collect();
        let cv2: Vec<_> = c.cv.iter().map(|&(u, v)| (pi(u), pi(v))).collect();
        let g2 = DirectedProductGraph::build(n, &cp2, &cv2).unwrap();
        let mut feats2 = vec![Vec::new(); n];
        for (v, row) in c.feats.iter().enumerate() {
            feats2[pi(v as NodeId) as usize] = row.clone();
        }
        let p = ModelParams::init(3, 4, layers, 9);
        let e1 = embed_all(&g, &features(&c.feats), &p, 4).unwrap();
        let e2 = embed_all(&g2, &features(&feats2), &p, 4).unwrap();
        for v in 0..n as NodeId {
            let w = pi(v);
            for (x, y) in e1.source(v).unwrap().iter().zip(e2.source(w).unwrap()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in e1.target(v).unwrap().iter().zip(e2.target(w).unwrap()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn adam_matches_reference_recurrence() {
    // Minimize (x - 3)^2 from x = 0 with a scripted gradient sequence.
    let cfg = AdamConfig {
        lr: 0.05,
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
    let mut params = vec![Matrix::zeros(1, 1)];
    let mut adam = Adam::new(cfg, &params);

    let (mut x, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
    let (mut b1t, mut b2t) = (1.0f64, 1.0f64);
    for _ in 0..500 {
        let g = 2.0 * (params[0][(0, 0)] - 3.0);
        adam.update(&mut params, &[Matrix::from_vec(1, 1, vec![g]).unwrap()]);

        let g_ref = 2.0 * (x - 3.0);
        m = 0.9 * m + 0.1 * g_ref;
        v = 0.999 * v + 0.001 * g_ref * g_ref;
        b1t *= 0.9;
        b2t *= 0.999;
        x -= 0.05 * (m / (1.0 - b1t)) / ((v / (1.0 - b2t)).sqrt() + 1e-8);

        assert!((params[0][(0, 0)] - x).abs() < 1e-12, "{} vs {x}", params[0][(0, 0)]);
    }
    assert!((x - 3.0).abs() < 0.05);
}

#[test]
fn adam_on_random_gradients_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = AdamConfig::default();
    let mut params = vec![Matrix::zeros(2, 3)];
    let mut adam = Adam::new(cfg, &params);
    let mut x = [0.0f64; 6];
    let mut m = [0.0f64; 6];
    let mut v = [0.0f64; 6];
    for t in 1..=50i32 {
        let g: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        adam.update(&mut params, &[Matrix::from_vec(2, 3, g.clone()).unwrap()]);
        for i in 0..6 {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let mh = m[i] / (1.0 - cfg.beta1.powi(t));
            let vh = v[i] / (1.0 - cfg.beta2.powi(t));
            x[i] -= cfg.lr * mh / (vh.sqrt() + cfg.eps);
        }
        for (a, b) in params[0].as_slice().iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
