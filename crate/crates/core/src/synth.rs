//! Synthetic marketplace with planted complementary structure.
//!
//! Categories are split into main and accessory categories. Main category
//! `i` buys into accessory category `i mod n_acc`. Each product of a main
//! category gets directed co-purchase edges to exposed products of its
//! accessory category; a fraction of accessories is never exposed and only
//! reachable through co-view links. Co-view pairs form cliques inside each
//! category; clique members share a style offset in feature space, and
//! main products prefer accessories whose style matches their own.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Normal};

use crate::config::KvFile;
use crate::error::{Error, Result};
use crate::features::{write_features, FeatureMatrix};
use crate::graph::{write_edges, DirectedProductGraph, KeyMap, NodeId};
use crate::linalg::{cosine, Matrix};
use crate::seed::{rng_for, TAG_SYNTH};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_categories: usize,
    pub products_per_category: usize,
    /// Fraction of categories that are accessory categories.
    pub accessory_fraction: f64,
    /// Expected share of exposed accessories each main product links to.
    pub cp_edge_prob: f64,
    /// Probability that a planted edge also gets its reverse.
    pub reciprocal_prob: f64,
    pub cv_clique_size: usize,
    pub feature_dim: usize,
    /// Per-coordinate std of the style offset shared by a co-view clique.
    pub style_std: f64,
    /// Per-coordinate std of the per-product noise.
    pub noise_std: f64,
    /// Fraction of accessories with no co-purchase edges at all.
    pub unexposed_fraction: f64,
    /// Strength of a main product's preference for accessories whose style
    /// is compatible with its own; 0 picks accessories uniformly.
    pub affinity: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_categories: 20,
            products_per_category: 100,
            accessory_fraction: 0.5,
            cp_edge_prob: 0.0875,
            reciprocal_prob: 0.2,
            cv_clique_size: 5,
            feature_dim: 32,
            style_std: 0.3,
            noise_std: 0.1,
            unexposed_fraction: 0.2,
            affinity: 16.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("accessory_fraction", self.accessory_fraction),
            ("cp_edge_prob", self.cp_edge_prob),
            ("reciprocal_prob", self.reciprocal_prob),
            ("unexposed_fraction", self.unexposed_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, v) in [
            ("num_categories", self.num_categories),
            ("products_per_category", self.products_per_category),
            ("cv_clique_size", self.cv_clique_size),
            ("feature_dim", self.feature_dim),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if !(self.affinity >= 0.0 && self.affinity.is_finite()) {
            return Err(Error::Config(format!("affinity must be >= 0, got {}", self.affinity)));
        }
        for (name, v) in [("noise_std", self.noise_std), ("style_std", self.style_std)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.num_categories * self.products_per_category > NodeId::MAX as usize {
            return Err(Error::Config("too many products".into()));
        }
        Ok(())
    }

    pub fn from_kv(kv: &mut KvFile) -> Result<Self> {
        let mut c = Self::default();
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = kv.take(stringify!($field))? {
                    c.$field = v;
                }
            )*};
        }
        set!(num_categories, products_per_category, accessory_fraction, cp_edge_prob,
             reciprocal_prob, cv_clique_size, feature_dim, style_std, noise_std, unexposed_fraction, affinity,
             seed);
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "num_categories = {}\nproducts_per_category = {}\naccessory_fraction = {:?}\n\
             cp_edge_prob = {:?}\nreciprocal_prob = {:?}\ncv_clique_size = {}\nfeature_dim = {}\n\
             style_std = {:?}\nnoise_std = {:?}\nunexposed_fraction = {:?}\naffinity = {:?}\nseed = {}\n",
            self.num_categories,
            self.products_per_category,
            self.accessory_fraction,
            self.cp_edge_prob,
            self.reciprocal_prob,
            self.cv_clique_size,
            self.feature_dim,
            self.style_std,
            self.noise_std,
            self.unexposed_fraction,
            self.affinity,
            self.seed
        )
    }

    /// Number of accessory categories (at least one when the fraction is
    /// positive and there are two or more categories).
    pub fn num_accessory_categories(&self) -> usize {
        if self.accessory_fraction == 0.0 || self.num_categories < 2 {
            return 0;
        }
        let n = (self.num_categories as f64 * self.accessory_fraction).round() as usize;
        n.clamp(1, self.num_categories - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairKind {
    /// Planted co-purchase edge.
    Planted,
    /// `a -> b` planted and `b ~ c` co-viewed, `(a, c)` not co-purchased.
    Transitive,
}

impl PairKind {
    pub fn tag(self) -> &'static str {
        match self {
            PairKind::Planted => "planted",
            PairKind::Transitive => "transitive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthGraph {
    pub keys: KeyMap,
    pub graph: DirectedProductGraph,
    pub features: FeatureMatrix,
    /// Category of each product.
    pub category: Vec<usize>,
    pub is_accessory_category: Vec<bool>,
    /// Accessories that received no co-purchase edges by construction.
    pub unexposed: Vec<bool>,
    pub ground_truth: Vec<(NodeId, NodeId, PairKind)>,
}

impl SynthGraph {
    pub fn write_edges<W: Write>(&self, w: W) -> Result<()> {
        write_edges(w, &self.graph, &self.keys)
    }

    pub fn write_features<W: Write>(&self, w: W) -> Result<()> {
        write_features(w, &self.keys, &self.features)
    }

    /// `<a>\t<b>\tplanted|transitive`, sorted by kind then ids.
    pub fn write_ground_truth<W: Write>(&self, mut w: W) -> Result<()> {
        for &(a, b, kind) in &self.ground_truth {
            let key = |v| self.keys.key(v).expect("generated key");
            writeln!(w, "{}\t{}\t{}", key(a), key(b), kind.tag())?;
        }
        Ok(())
    }
}

fn product_key(category: usize, index: usize) -> String {
    format!("cat{category:02}-{index:04}")
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthGraph> {
    cfg.validate()?;
    let (nc, ppc) = (cfg.num_categories, cfg.products_per_category);
    let n = nc * ppc;
    let n_acc = cfg.num_accessory_categories();
    let n_main = nc - n_acc;
    let id = |c: usize, i: usize| (c * ppc + i) as NodeId;

    let mut keys = KeyMap::new();
    for c in 0..nc {
        for i in 0..ppc {
            keys.insert_new(&product_key(c, i))?;
        }
    }
    let category: Vec<usize> = (0..n).map(|v| v / ppc).collect();
    let is_acc: Vec<bool> = (0..nc).map(|c| c >= n_main).collect();

    // Exposure and co-view cliques, both over a per-category random order.
    let mut rng = rng_for(cfg.seed, &[TAG_SYNTH, 1]);
    let mut unexposed = vec![false; n];
    let mut clique_of = vec![0usize; n];
    let mut num_cliques = 0;
    let mut cv: Vec<(NodeId, NodeId)> = Vec::new();
    for c in 0..nc {
        let mut members: Vec<usize> = (0..ppc).collect();
        if is_acc[c] {
            members.shuffle(&mut rng);
            let hidden = (ppc as f64 * cfg.unexposed_fraction).round() as usize;
            for &i in &members[..hidden.min(ppc)] {
                unexposed[id(c, i) as usize] = true;
            }
        }
        members.shuffle(&mut rng);
        for clique in members.chunks(cfg.cv_clique_size) {
            for (a, &i) in clique.iter().enumerate() {
                clique_of[id(c, i) as usize] = num_cliques;
                for &j in &clique[a + 1..] {
                    let (u, v) = (id(c, i), id(c, j));
                    cv.push((u.min(v), u.max(v)));
                }
            }
            num_cliques += 1;
        }
    }

    // Features: unit-norm category centroid, plus a style offset shared by
    // each co-view clique, plus per-product noise.
    let mut rng = rng_for(cfg.seed, &[TAG_SYNTH, 0]);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let d = cfg.feature_dim;
    let centroids: Vec<Vec<f64>> = (0..nc)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| std_normal.sample(&mut rng)).collect();
            let norm = crate::linalg::norm(&v);
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    let styles: Vec<Vec<f64>> = (0..num_cliques)
        .map(|_| (0..d).map(|_| cfg.style_std * std_normal.sample(&mut rng)).collect())
        .collect();
    let mut feat = Matrix::zeros(n, d);
    for v in 0..n {
        let (c, st) = (&centroids[category[v]], &styles[clique_of[v]]);
        for (k, x) in feat.row_mut(v).iter_mut().enumerate() {
            *x = c[k] + st[k] + cfg.noise_std * std_normal.sample(&mut rng);
        }
    }

    // Planted co-purchase edges. A main product's out-degree is
    // Binomial(exposed, cp_edge_prob); its accessories are drawn without
    // replacement with weight exp(affinity * cos(P dev_u, dev_v)), where dev
    // is the feature minus the category centroid and P a fixed signed
    // permutation. P keeps compatible pairs from simply looking alike.
    let dev: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            feat.row(v)
                .iter()
                .zip(&centroids[category[v]])
                .map(|(x, c)| x - c)
                .collect()
        })
        .collect();
    let mut rng = rng_for(cfg.seed, &[TAG_SYNTH, 2]);
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let signs: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let compat: Vec<Vec<f64>> = dev
        .iter()
        .map(|x| (0..d).map(|k| signs[k] * x[perm[k]]).collect())
        .collect();
    let mut planted: Vec<(NodeId, NodeId)> = Vec::new();
    let mut cp: Vec<(NodeId, NodeId)> = Vec::new();
    if n_acc > 0 {
        for m in 0..n_main {
            let a = n_main + m % n_acc;
            let exposed: Vec<NodeId> = (0..ppc)
                .map(|j| id(a, j))
                .filter(|&v| !unexposed[v as usize])
                .collect();
            if exposed.is_empty() {
                continue;
            }
            let degree = Binomial::new(exposed.len() as u64, cfg.cp_edge_prob).expect("p validated");
            for i in 0..ppc {
                let u = id(m, i);
                let k = degree.sample(&mut rng) as usize;
                let weights: Vec<f64> = exposed
                    .iter()
                    .map(|&v| (cfg.affinity * cosine(&compat[u as usize], &dev[v as usize])).exp())
                    .collect();
                let mut picked = index::sample_weighted(&mut rng, exposed.len(), |j| weights[j], k)
                    .map_err(|e| Error::Config(format!("edge weights: {e}")))?
                    .into_vec();
                picked.sort_unstable();
                for j in picked {
                    let v = exposed[j];
                    planted.push((u, v));
                    cp.push((u, v));
                    if rng.random::<f64>() < cfg.reciprocal_prob {
                        cp.push((v, u));
                    }
                }
            }
        }
    }

    let graph = DirectedProductGraph::build(n, &cp, &cv)?;

    let mut truth: BTreeSet<(PairKind, NodeId, NodeId)> = BTreeSet::new();
    for &(a, b) in &planted {
        truth.insert((PairKind::Planted, a, b));
        for &c in graph.cv(b) {
            if c != a && !graph.has_cp_edge(a, c) {
                truth.insert((PairKind::Transitive, a, c));
            }
        }
    }

    Ok(SynthGraph {
        keys,
        graph,
        features: FeatureMatrix::new(feat)?,
        category,
        is_accessory_category: is_acc,
        unexposed,
        ground_truth: truth.into_iter().map(|(k, a, b)| (a, b, k)).collect(),
    })
}
