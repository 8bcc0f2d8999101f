//! Layer-wise neighbor sampling and negative sampling.
//!
//! A node's representation at layer `l` reads four neighbor lists, one per
//! (relation, direction) slot:
//!
//! | slot     | feeds channel | reads channel at `l - 1` |
//! |----------|---------------|--------------------------|
//! | `CpOut`  | source        | target                   |
//! | `CvOut`  | source        | source                   |
//! | `CpIn`   | target        | source                   |
//! | `CvIn`   | target        | target                   |
//!
//! Each slot gets its own budget equal to the layer cap. Sampling of a given
//! (node, layer, slot) is keyed only by the batch seed, so it does not depend
//! on which other nodes share the batch or on thread scheduling.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Direction, DirectedProductGraph, NodeId, RelationKind};
use crate::par;
use crate::seed::{rng_for, TAG_NEGATIVES, TAG_SAMPLE_BLOCKS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    CpOut = 0,
    CvOut = 1,
    CpIn = 2,
    CvIn = 3,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::CpOut, Slot::CvOut, Slot::CpIn, Slot::CvIn];

    pub fn relation(self) -> (RelationKind, Direction) {
        match self {
            Slot::CpOut => (RelationKind::CoPurchase, Direction::Out),
            Slot::CvOut => (RelationKind::CoView, Direction::Out),
            Slot::CpIn => (RelationKind::CoPurchase, Direction::In),
            Slot::CvIn => (RelationKind::CoView, Direction::In),
        }
    }

    /// Channel whose previous-layer representation this slot aggregates.
    pub fn reads(self) -> Channel {
        match self {
            Slot::CpOut | Slot::CvIn => Channel::Target,
            Slot::CvOut | Slot::CpIn => Channel::Source,
        }
    }

    /// Channel this slot contributes to.
    pub fn feeds(self) -> Channel {
        match self {
            Slot::CpOut | Slot::CvOut => Channel::Source,
            Slot::CpIn | Slot::CvIn => Channel::Target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Source,
    Target,
}

/// Per-layer neighbor caps, index 0 = layer 1 (the input side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fanouts(Vec<usize>);

impl Fanouts {
    pub fn new(caps: Vec<usize>) -> Result<Self> {
        if caps.is_empty() || caps.contains(&0) {
            return Err(Error::Config(format!(
                "fanouts must be non-empty with every cap >= 1, got {caps:?}"
            )));
        }
        Ok(Self(caps))
    }

    /// No cap at any layer.
    pub fn full(layers: usize) -> Self {
        Self(vec![usize::MAX; layers])
    }

    pub fn layers(&self) -> usize {
        self.0.len()
    }

    pub fn cap(&self, layer: usize) -> usize {
        self.0[layer - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl Default for Fanouts {
    fn default() -> Self {
        Self(vec![20, 10, 10])
    }
}

/// CSR-style lists of local indices into a layer's `src` array.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborLists {
    offsets: Vec<usize>,
    indices: Vec<u32>,
}

impl NeighborLists {
    #[inline]
    pub fn get(&self, row: usize) -> &[u32] {
        &self.indices[self.offsets[row]..self.offsets[row + 1]]
    }

    pub fn total(&self) -> usize {
        self.indices.len()
    }
}

/// The computation for one GNN layer: rows `dst` are produced from rows `src`
/// of the previous layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerBlock {
    pub dst: Vec<NodeId>,
    pub src: Vec<NodeId>,
    lists: [NeighborLists; 4],
}

impl LayerBlock {
    #[inline]
    pub fn lists(&self, slot: Slot) -> &NeighborLists {
        &self.lists[slot as usize]
    }

    /// Global ids of the sampled neighbors of `dst[row]` in `slot`.
    pub fn neighbor_ids(&self, row: usize, slot: Slot) -> Vec<NodeId> {
        self.lists(slot)
            .get(row)
            .iter()
            .map(|&j| self.src[j as usize])
            .collect()
    }
}

/// Layered computation graph, `layers[0]` consumes input features and
/// `layers[L - 1]` produces the seed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationBlocks {
    pub layers: Vec<LayerBlock>,
}

impl ComputationBlocks {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn seeds(&self) -> &[NodeId] {
        &self.layers.last().expect("at least one layer").dst
    }

    /// Nodes whose input features are read.
    pub fn input_nodes(&self) -> &[NodeId] {
        &self.layers[0].src
    }
}

fn sample_slot<A: Adjacency + ?Sized>(
    graph: &A,
    node: NodeId,
    slot: Slot,
    layer: usize,
    cap: usize,
    rng_seed: u64,
) -> Vec<NodeId> {
    let (kind, dir) = slot.relation();
    let all = graph.neighbors_of(node, kind, dir);
    if all.len() <= cap {
        return all.into_owned();
    }
    let mut rng = rng_for(
        rng_seed,
        &[TAG_SAMPLE_BLOCKS, layer as u64, node as u64, slot as u64],
    );
    let mut picked = index::sample(&mut rng, all.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| all[i]).collect()
}

/// Builds the L-layer blocks for `seeds`. A (node, slot) list no longer than
/// the layer cap is taken whole; longer lists are sampled uniformly without
/// replacement down to exactly the cap. Sampled lists keep ascending id order.
pub fn sample_blocks<A: Adjacency + ?Sized>(
    graph: &A,
    seeds: &[NodeId],
    fanouts: &Fanouts,
    rng_seed: u64,
) -> ComputationBlocks {
    let mut layers = Vec::with_capacity(fanouts.layers());
    let mut dst: Vec<NodeId> = seeds.to_vec();
    for layer in (1..=fanouts.layers()).rev() {
        let cap = fanouts.cap(layer);
        let sampled: Vec<[Vec<NodeId>; 4]> = par::map_slice(&dst, |&u| {
            Slot::ALL.map(|slot| sample_slot(graph, u, slot, layer, cap, rng_seed))
        });

        let mut src: Vec<NodeId> = sampled.iter().flatten().flatten().copied().collect();
        src.sort_unstable();
        src.dedup();

        let local = |v: NodeId| src.binary_search(&v).expect("src covers sampled ids") as u32;
        let lists = Slot::ALL.map(|slot| {
            let mut offsets = Vec::with_capacity(dst.len() + 1);
            let mut indices = Vec::new();
            offsets.push(0);
            for per_node in &sampled {
                indices.extend(per_node[slot as usize].iter().map(|&v| local(v)));
                offsets.push(indices.len());
            }
            NeighborLists { offsets, indices }
        });

        let next = src.clone();
        layers.push(LayerBlock { dst, src, lists });
        dst = next;
    }
    layers.reverse();
    ComputationBlocks { layers }
}

/// Unsampled L-hop blocks.
pub fn full_blocks<A: Adjacency + ?Sized>(
    graph: &A,
    seeds: &[NodeId],
    layers: usize,
) -> ComputationBlocks {
    sample_blocks(graph, seeds, &Fanouts::full(layers), 0)
}

/// Negative samples, `per_edge[i]` belongs to the i-th positive edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeBatch {
    pub per_edge: Vec<Vec<NodeId>>,
}

impl NegativeBatch {
    pub fn total(&self) -> usize {
        self.per_edge.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeConfig {
    pub per_positive: usize,
    /// Also reject the query's known co-purchase out-neighbors.
    pub exclude_positives: bool,
}

impl Default for NegativeConfig {
    fn default() -> Self {
        Self {
            per_positive: 5,
            exclude_positives: true,
        }
    }
}

fn draw_negatives(
    graph: &DirectedProductGraph,
    u: NodeId,
    cfg: NegativeConfig,
    rng_seed: u64,
    edge_index: usize,
) -> (Vec<NodeId>, bool) {
    let n = graph.num_nodes();
    let banned: &[NodeId] = if cfg.exclude_positives {
        graph.cp_out(u)
    } else {
        &[]
    };
    let is_banned = |z: NodeId| z == u || banned.binary_search(&z).is_ok();
    let allowed_count = n - 1 - banned.iter().filter(|&&z| z != u).count();
    let want = cfg.per_positive;
    let mut rng = rng_for(rng_seed, &[TAG_NEGATIVES, edge_index as u64]);

    if allowed_count == 0 {
        return (Vec::new(), true);
    }
    if allowed_count < want {
        let allowed: Vec<NodeId> = (0..n as NodeId).filter(|&z| !is_banned(z)).collect();
        let picks = (0..want)
            .map(|_| allowed[rng.random_range(0..allowed.len())])
            .collect();
        return (picks, true);
    }
    if allowed_count * 2 < n {
        // Sparse allowed set: enumerate instead of rejecting.
        let allowed: Vec<NodeId> = (0..n as NodeId).filter(|&z| !is_banned(z)).collect();
        let picks = index::sample(&mut rng, allowed.len(), want)
            .into_iter()
            .map(|i| allowed[i])
            .collect();
        return (picks, false);
    }
    let mut picks: Vec<NodeId> = Vec::with_capacity(want);
    while picks.len() < want {
        let z = rng.random_range(0..n as NodeId);
        if !is_banned(z) && !picks.contains(&z) {
            picks.push(z);
        }
    }
    (picks, false)
}

/// For each positive `(u, v)`, draws `per_positive` distinct ids uniformly from
/// the products other than `u` (and, by default, other than `u`'s co-purchase
/// out-neighbors). When fewer legal ids exist than requested, draws with
/// replacement from the legal set and logs a warning.
pub fn sample_negatives(
    graph: &DirectedProductGraph,
    positives: &[(NodeId, NodeId)],
    cfg: NegativeConfig,
    rng_seed: u64,
) -> Result<NegativeBatch> {
    if cfg.per_positive == 0 {
        return Err(Error::Config("negatives per positive must be >= 1".into()));
    }
    let drawn: Vec<(Vec<NodeId>, bool)> = par::map_range(positives.len(), |i| {
        draw_negatives(graph, positives[i].0, cfg, rng_seed, i)
    });
    let degenerate = drawn.iter().filter(|(_, d)| *d).count();
    if degenerate > 0 {
        log::warn!(
            "{degenerate} positive edge(s) had fewer than {} legal negatives; sampled with replacement",
            cfg.per_positive
        );
    }
    Ok(NegativeBatch {
        per_edge: drawn.into_iter().map(|(v, _)| v).collect(),
    })
}
