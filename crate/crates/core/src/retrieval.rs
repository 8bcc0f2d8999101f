//! Top-k retrieval over trained embeddings.
//!
//! Related products are ranked by `θ^s_q · θ^t_v`, similar products by
//! `θ^s_q · θ^s_v`. Ties are broken by ascending id. The exact engine scans
//! every row; the optional approximate engine is an inverted-file index over
//! spherical k-means partitions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::{DirectedProductGraph, NodeId};
use crate::linalg::{self, Matrix};
use crate::model::DualEmbeddings;
use crate::par;
use crate::seed::{rng_for, TAG_IVF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub id: NodeId,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    Related,
    Similar,
}

#[derive(Debug, Clone, Copy)]
pub enum Filter<'a> {
    None,
    ExcludeQuery,
    /// Excludes the query and its co-purchase out-neighbors in the given graph.
    ExcludeTrainNeighbors(&'a DirectedProductGraph),
}

impl Filter<'_> {
    fn excludes(&self, query: Option<NodeId>, v: NodeId) -> bool {
        match *self {
            Filter::None => false,
            Filter::ExcludeQuery => query == Some(v),
            Filter::ExcludeTrainNeighbors(g) => {
                query == Some(v) || query.is_some_and(|q| g.has_cp_edge(q, v))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    Exact,
    Approximate { lists: usize, probes: usize },
}

/// Heap entry ordered so that the heap's maximum is the weakest candidate.
#[derive(Clone, Copy)]
struct Weakest(Scored);

impl PartialEq for Weakest {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Weakest {}

impl PartialOrd for Weakest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weakest {
    fn cmp(&self, other: &Self) -> Ordering {
        // lower score is weaker; on equal score the larger id is weaker
        other
            .0
            .score
            .total_cmp(&self.0.score)
            .then(self.0.id.cmp(&other.0.id))
    }
}

/// Ranking order: score descending, then id ascending.
pub fn rank_order(a: &Scored, b: &Scored) -> Ordering {
    b.score.total_cmp(&a.score).then(a.id.cmp(&b.id))
}

/// Keeps the best `k` of a stream of candidates.
pub struct TopK {
    k: usize,
    heap: BinaryHeap<Weakest>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, id: NodeId, score: f64) {
        let cand = Weakest(Scored { id, score });
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if let Some(worst) = self.heap.peek() {
            if cand < *worst {
                self.heap.pop();
                self.heap.push(cand);
            }
        }
    }

    pub fn into_sorted(self) -> Vec<Scored> {
        let mut v: Vec<Scored> = self.heap.into_iter().map(|w| w.0).collect();
        v.sort_by(rank_order);
        v
    }
}

/// Inverted-file partition of one embedding matrix.
#[derive(Debug, Clone)]
struct Ivf {
    centroids: Matrix,
    members: Vec<Vec<NodeId>>,
}

impl Ivf {
    fn build(rows: &Matrix, lists: usize, seed: u64) -> Self {
        let n = rows.rows();
        let d = rows.cols();
        let lists = lists.clamp(1, n.max(1));
        let mut rng = rng_for(seed, &[TAG_IVF, lists as u64]);
        let mut centroids = Matrix::zeros(lists, d);
        if n > 0 {
            for (c, i) in index::sample(&mut rng, n, lists).into_iter().enumerate() {
                centroids.row_mut(c).copy_from_slice(rows.row(i));
            }
        }
        let assign = |centroids: &Matrix| -> Vec<usize> {
            par::map_range(n, |i| {
                let r = rows.row(i);
                (0..centroids.rows())
                    .map(|c| (c, linalg::dot(r, centroids.row(c))))
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map_or(0, |(c, _)| c)
            })
        };
        let mut assignment = assign(&centroids);
        for _ in 0..10 {
            let mut sums = Matrix::zeros(lists, d);
            for (i, &c) in assignment.iter().enumerate() {
                linalg::axpy(1.0, rows.row(i), sums.row_mut(c));
            }
            for c in 0..lists {
                let nrm = linalg::norm(sums.row(c));
                if nrm > 0.0 {
                    let row = sums.row(c).iter().map(|v| v / nrm).collect::<Vec<_>>();
                    centroids.row_mut(c).copy_from_slice(&row);
                }
            }
            let next = assign(&centroids);
            if next == assignment {
                break;
            }
            assignment = next;
        }
        let mut members = vec![Vec::new(); lists];
        for (i, &c) in assignment.iter().enumerate() {
            members[c].push(i as NodeId);
        }
        Self { centroids, members }
    }

    fn probe(&self, query: &[f64], probes: usize) -> Vec<usize> {
        let mut order: Vec<(usize, f64)> = (0..self.centroids.rows())
            .map(|c| (c, linalg::dot(query, self.centroids.row(c))))
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        order.into_iter().take(probes.max(1)).map(|(c, _)| c).collect()
    }
}

/// Immutable search index over embeddings of nodes `0..n`.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    emb: DualEmbeddings,
    mode: IndexMode,
    ivf_target: Option<Ivf>,
    ivf_source: Option<Ivf>,
}

impl EmbeddingIndex {
    pub fn exact(emb: DualEmbeddings) -> Result<Self> {
        Self::new(emb, IndexMode::Exact, 0)
    }

    pub fn new(emb: DualEmbeddings, mode: IndexMode, seed: u64) -> Result<Self> {
        if emb.ids().iter().enumerate().any(|(i, &id)| id as usize != i) {
            return Err(Error::Invalid(
                "index rows must be ordered by dense node id 0..n".into(),
            ));
        }
        let (ivf_target, ivf_source) = match mode {
            IndexMode::Exact => (None, None),
            IndexMode::Approximate { lists, .. } => (
                Some(Ivf::build(&emb.theta_t, lists, seed)),
                Some(Ivf::build(&emb.theta_s, lists, seed ^ 1)),
            ),
        };
        Ok(Self {
            emb,
            mode,
            ivf_target,
            ivf_source,
        })
    }

    pub fn embeddings(&self) -> &DualEmbeddings {
        &self.emb
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.emb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emb.is_empty()
    }

    fn source_row(&self, q: NodeId) -> Result<&[f64]> {
        self.emb.source(q).ok_or(Error::NodeOutOfRange {
            id: q as u64,
            num_nodes: self.emb.len(),
        })
    }

    /// Top `k` by `θ^s_q · θ^t_v`.
    pub fn recommend_related(&self, q: NodeId, k: usize, filter: Filter<'_>) -> Result<Vec<Scored>> {
        let v = self.source_row(q)?;
        Ok(self.search(v, QueryMode::Related, k, Some(q), filter))
    }

    /// Top `k` by `θ^s_q · θ^s_v`.
    pub fn recommend_similar(&self, q: NodeId, k: usize, filter: Filter<'_>) -> Result<Vec<Scored>> {
        let v = self.source_row(q)?;
        Ok(self.search(v, QueryMode::Similar, k, Some(q), filter))
    }

    /// Top `k` targets for a free-standing source vector (e.g. a cold product).
    pub fn recommend_for_vector(&self, source: &[f64], k: usize, filter: Filter<'_>) -> Result<Vec<Scored>> {
        if source.len() != self.emb.dim() {
            return Err(Error::Shape(format!(
                "query vector has dimension {}, index has {}",
                source.len(),
                self.emb.dim()
            )));
        }
        Ok(self.search(source, QueryMode::Related, k, None, filter))
    }

    /// One result per query, each identical to the single-query call.
    pub fn batch_recommend(
        &self,
        queries: &[NodeId],
        k: usize,
        mode: QueryMode,
        filter: Filter<'_>,
    ) -> Vec<Result<Vec<Scored>>> {
        par::map_slice(queries, |&q| match mode {
            QueryMode::Related => self.recommend_related(q, k, filter),
            QueryMode::Similar => self.recommend_similar(q, k, filter),
        })
    }

    fn search(
        &self,
        query: &[f64],
        mode: QueryMode,
        k: usize,
        query_id: Option<NodeId>,
        filter: Filter<'_>,
    ) -> Vec<Scored> {
        if k == 0 {
            return Vec::new();
        }
        if query.iter().all(|&x| x == 0.0) {
            log::warn!(
                "query {} has an all-zero source embedding; returning no results",
                query_id.map_or_else(|| "<vector>".to_string(), |q| q.to_string())
            );
            return Vec::new();
        }
        let (rows, ivf) = match mode {
            QueryMode::Related => (&self.emb.theta_t, self.ivf_target.as_ref()),
            QueryMode::Similar => (&self.emb.theta_s, self.ivf_source.as_ref()),
        };
        let mut top = TopK::new(k.min(rows.rows()));
        let mut consider = |v: NodeId| {
            if !filter.excludes(query_id, v) {
                top.push(v, linalg::dot(query, rows.row(v as usize)));
            }
        };
        match (self.mode, ivf) {
            (IndexMode::Approximate { probes, .. }, Some(ivf)) => {
                for c in ivf.probe(query, probes) {
                    ivf.members[c].iter().for_each(|&v| consider(v));
                }
            }
            _ => (0..rows.rows() as NodeId).for_each(consider),
        }
        top.into_sorted()
    }
}
