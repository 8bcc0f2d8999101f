//! Cold-start embedding: attach a feature-only product to its most similar
//! warm products through a temporary overlay and run the trained model on
//! the overlay. The base graph is never modified.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::features::FeatureRows;
use crate::graph::{Adjacency, Direction, DirectedProductGraph, NodeId, RelationKind};
use crate::linalg;
use crate::model::{forward, ModelParams};
use crate::retrieval::{EmbeddingIndex, Filter, Scored};
use crate::sampler::full_blocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColdStartConfig {
    /// Number of warm neighbors to attach.
    pub k_sim: usize,
    /// Relation of the attached edges. Co-view edges are symmetric;
    /// co-purchase edges point from the cold product to its neighbors.
    pub relation: RelationKind,
}

impl Default for ColdStartConfig {
    fn default() -> Self {
        Self {
            k_sim: 5,
            relation: RelationKind::CoView,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColdEmbedding {
    pub theta_s: Vec<f64>,
    pub theta_t: Vec<f64>,
    /// Attached warm products with their feature cosine, best first.
    pub warm: Vec<(NodeId, f64)>,
}

/// Base graph plus one extra node `cold = num_nodes` linked to `warm`.
struct Overlay<'a> {
    base: &'a DirectedProductGraph,
    cold: NodeId,
    warm: Vec<NodeId>,
    relation: RelationKind,
}

impl Adjacency for Overlay<'_> {
    fn num_nodes(&self) -> usize {
        self.base.num_nodes() + 1
    }

    fn neighbors_of(&self, u: NodeId, kind: RelationKind, dir: Direction) -> Cow<'_, [NodeId]> {
        let linked = kind == self.relation;
        // cold -> warm in the Out view (both views for co-view)
        let cold_side = match kind {
            RelationKind::CoView => true,
            RelationKind::CoPurchase => dir == Direction::Out,
        };
        if u == self.cold {
            return if linked && cold_side {
                Cow::Borrowed(&self.warm)
            } else {
                Cow::Borrowed(&[])
            };
        }
        let base = self.base.neighbors_of(u, kind, dir);
        let warm_side = match kind {
            RelationKind::CoView => true,
            RelationKind::CoPurchase => dir == Direction::In,
        };
        if linked && warm_side && self.warm.binary_search(&u).is_ok() {
            let mut v = base.into_owned();
            v.push(self.cold); // largest id, order preserved
            Cow::Owned(v)
        } else {
            base
        }
    }
}

struct OverlayFeatures<'a, F: FeatureRows + ?Sized> {
    base: &'a F,
    cold: &'a [f64],
}

impl<F: FeatureRows + ?Sized> FeatureRows for OverlayFeatures<'_, F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn num_rows(&self) -> usize {
        self.base.num_rows() + 1
    }

    fn row(&self, i: usize) -> &[f64] {
        if i == self.base.num_rows() {
            self.cold
        } else {
            self.base.row(i)
        }
    }
}

/// Top `k` warm products by cosine similarity of input features; ties by id.
/// `candidates`, when given, restricts the lookup.
pub fn similar_by_features<F: FeatureRows + ?Sized>(
    features: &F,
    query: &[f64],
    k: usize,
    candidates: Option<&[bool]>,
) -> Vec<(NodeId, f64)> {
    let mut scored: Vec<(NodeId, f64)> = (0..features.num_rows())
        .filter(|&i| candidates.is_none_or(|c| c[i]))
        .map(|i| (i as NodeId, linalg::cosine(query, features.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Attaches a cold product with features `x_cold` to its `k_sim` most
/// feature-similar warm products and embeds it on the resulting overlay.
pub fn attach_and_embed<F: FeatureRows + ?Sized>(
    graph: &DirectedProductGraph,
    features: &F,
    params: &ModelParams,
    x_cold: &[f64],
    candidates: Option<&[bool]>,
    cfg: &ColdStartConfig,
) -> Result<ColdEmbedding> {
    if x_cold.len() != features.dim() {
        return Err(Error::Shape(format!(
            "cold feature has dimension {}, catalog features have {}",
            x_cold.len(),
            features.dim()
        )));
    }
    if x_cold.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cold feature vector".into()));
    }
    if x_cold.iter().all(|&v| v == 0.0) {
        return Err(Error::Invalid("cold feature vector is all zero".into()));
    }
    if cfg.k_sim == 0 {
        return Err(Error::Config("k_sim must be >= 1".into()));
    }
    if features.num_rows() != graph.num_nodes() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} graph nodes",
            features.num_rows(),
            graph.num_nodes()
        )));
    }

    let warm = similar_by_features(features, x_cold, cfg.k_sim, candidates);
    let mut warm_ids: Vec<NodeId> = warm.iter().map(|w| w.0).collect();
    warm_ids.sort_unstable();
    let cold = graph.num_nodes() as NodeId;
    let overlay = Overlay {
        base: graph,
        cold,
        warm: warm_ids,
        relation: cfg.relation,
    };
    let feats = OverlayFeatures {
        base: features,
        cold: x_cold,
    };
    let blocks = full_blocks(&overlay, &[cold], params.layers());
    let emb = forward(&blocks, &feats, params)?;
    Ok(ColdEmbedding {
        theta_s: emb.theta_s.row(0).to_vec(),
        theta_t: emb.theta_t.row(0).to_vec(),
        warm,
    })
}

/// Probes the target space with a cold product's source vector.
pub fn recommend_for_cold(
    theta_s: &[f64],
    index: &EmbeddingIndex,
    k: usize,
    filter: Filter<'_>,
) -> Result<Vec<Scored>> {
    index.recommend_for_vector(theta_s, k, filter)
}
