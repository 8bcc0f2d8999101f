//! Evaluation splits and ranking / link-prediction metrics.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::coldstart::{attach_and_embed, ColdStartConfig};
use crate::error::{Error, Result};
use crate::features::FeatureRows;
use crate::graph::{DirectedProductGraph, NodeId};
use crate::linalg;
use crate::model::{embed_all, DualEmbeddings, ModelParams};
use crate::par;
use crate::seed::{rng_for, TAG_EVAL_NEG, TAG_SPLIT};

pub const DEFAULT_KS: [usize; 3] = [5, 10, 20];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.75,
            val: 0.05,
            test: 0.20,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Config(format!("split ratios must lie in [0, 1]: {self:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Exact partition sizes for `n` items (train and val rounded, test takes the rest).
    fn counts(&self, n: usize) -> (usize, usize, usize) {
        let train = ((n as f64) * self.train).round() as usize;
        let val = (((n as f64) * self.val).round() as usize).min(n - train.min(n));
        let train = train.min(n);
        (train, val, n - train - val)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Edge,
    Node,
    SelectionBias,
}

impl std::str::FromStr for SplitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "edge" => Ok(SplitKind::Edge),
            "node" => Ok(SplitKind::Node),
            "selection-bias" => Ok(SplitKind::SelectionBias),
            other => Err(format!("unknown split kind {other:?}")),
        }
    }
}

impl std::fmt::Display for SplitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitKind::Edge => "edge",
            SplitKind::Node => "node",
            SplitKind::SelectionBias => "selection-bias",
        })
    }
}

/// Train/validation/test partition for one evaluation task. Co-view pairs
/// always stay on the training side.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSplit {
    pub kind: SplitKind,
    pub num_nodes: usize,
    pub train_cp: Vec<(NodeId, NodeId)>,
    pub val_cp: Vec<(NodeId, NodeId)>,
    pub test_cp: Vec<(NodeId, NodeId)>,
    pub cv_pairs: Vec<(NodeId, NodeId)>,
    /// Transitive co-purchase edges added to the test side (selection-bias split).
    pub synthesized: Vec<(NodeId, NodeId)>,
    /// Candidates before the cap was applied (selection-bias split).
    pub synthesized_before_cap: usize,
    /// Node partitions (node split only).
    pub train_nodes: Vec<NodeId>,
    pub val_nodes: Vec<NodeId>,
    pub test_nodes: Vec<NodeId>,
}

impl EvalSplit {
    /// The graph models are trained and evaluated on: training co-purchase
    /// edges plus (optionally) the co-view pairs.
    pub fn train_graph(&self, use_cv: bool) -> DirectedProductGraph {
        let cv: &[(NodeId, NodeId)] = if use_cv { &self.cv_pairs } else { &[] };
        DirectedProductGraph::build(self.num_nodes, &self.train_cp, cv)
            .expect("split edges come from a valid graph")
    }

    /// Test edges for ranking: all test edges plus synthesized ones.
    pub fn all_test_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e = self.test_cp.clone();
        e.extend_from_slice(&self.synthesized);
        e
    }

    pub fn is_train_node(&self) -> Vec<bool> {
        match self.kind {
            SplitKind::Node => {
                let mut m = vec![false; self.num_nodes];
                self.train_nodes.iter().for_each(|&v| m[v as usize] = true);
                m
            }
            _ => vec![true; self.num_nodes],
        }
    }
}

type Edges = Vec<(NodeId, NodeId)>;

fn partition_edges(
    g: &DirectedProductGraph,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Edges, Edges, Edges)> {
    ratios.validate()?;
    let mut edges = g.cp_edges();
    let mut rng = rng_for(seed, &[TAG_SPLIT, 0]);
    edges.shuffle(&mut rng);
    let (n_train, n_val, _) = ratios.counts(edges.len());
    let mut train = edges[..n_train].to_vec();
    let mut val = edges[n_train..n_train + n_val].to_vec();
    let mut test = edges[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok((train, val, test))
}

/// Uniform random partition of the co-purchase edges.
pub fn make_edge_split(g: &DirectedProductGraph, ratios: SplitRatios, seed: u64) -> Result<EvalSplit> {
    let (train_cp, val_cp, test_cp) = partition_edges(g, ratios, seed)?;
    Ok(EvalSplit {
        kind: SplitKind::Edge,
        num_nodes: g.num_nodes(),
        train_cp,
        val_cp,
        test_cp,
        cv_pairs: g.cv_pairs(),
        synthesized: Vec::new(),
        synthesized_before_cap: 0,
        train_nodes: Vec::new(),
        val_nodes: Vec::new(),
        test_nodes: Vec::new(),
    })
}

/// Edge split plus transitive test edges `(a, c)` for every training edge
/// `(a, b)` and co-view pair `b ~ c` with `(a, c)` not a co-purchase edge.
/// At most `|test|` synthesized edges are kept.
pub fn make_selection_bias_split(
    g: &DirectedProductGraph,
    ratios: SplitRatios,
    seed: u64,
) -> Result<EvalSplit> {
    let mut split = make_edge_split(g, ratios, seed)?;
    split.kind = SplitKind::SelectionBias;
    let mut synth: Vec<(NodeId, NodeId)> = split
        .train_cp
        .iter()
        .flat_map(|&(a, b)| g.cv(b).iter().map(move |&c| (a, c)))
        .filter(|&(a, c)| a != c && !g.has_cp_edge(a, c))
        .collect();
    synth.sort_unstable();
    synth.dedup();
    split.synthesized_before_cap = synth.len();
    let cap = split.test_cp.len();
    if synth.len() > cap {
        let mut rng = rng_for(seed, &[TAG_SPLIT, 1]);
        synth.shuffle(&mut rng);
        synth.truncate(cap);
        synth.sort_unstable();
    }
    split.synthesized = synth;
    Ok(split)
}

/// Node partition. The training graph is the subgraph induced by training
/// nodes; test edges are co-purchase edges from a test node to a training
/// node, so test nodes are queried as cold products.
pub fn make_node_split(g: &DirectedProductGraph, ratios: SplitRatios, seed: u64) -> Result<EvalSplit> {
    ratios.validate()?;
    let n = g.num_nodes();
    let mut nodes: Vec<NodeId> = (0..n as NodeId).collect();
    let mut rng = rng_for(seed, &[TAG_SPLIT, 2]);
    nodes.shuffle(&mut rng);
    let (n_train, n_val, _) = ratios.counts(n);
    let mut train_nodes = nodes[..n_train].to_vec();
    let mut val_nodes = nodes[n_train..n_train + n_val].to_vec();
    let mut test_nodes = nodes[n_train + n_val..].to_vec();
    train_nodes.sort_unstable();
    val_nodes.sort_unstable();
    test_nodes.sort_unstable();

    let mut role = vec![0u8; n];
    val_nodes.iter().for_each(|&v| role[v as usize] = 1);
    test_nodes.iter().for_each(|&v| role[v as usize] = 2);
    let cp = g.cp_edges();
    let pick = |r: u8| -> Vec<(NodeId, NodeId)> {
        cp.iter()
            .copied()
            .filter(|&(u, v)| role[u as usize] == r && role[v as usize] == 0)
            .collect()
    };
    let train_cp = pick(0);
    let cv_pairs = g
        .cv_pairs()
        .into_iter()
        .filter(|&(u, v)| role[u as usize] == 0 && role[v as usize] == 0)
        .collect();
    Ok(EvalSplit {
        kind: SplitKind::Node,
        num_nodes: n,
        train_cp,
        val_cp: pick(1),
        test_cp: pick(2),
        cv_pairs,
        synthesized: Vec::new(),
        synthesized_before_cap: 0,
        train_nodes,
        val_nodes,
        test_nodes,
    })
}

pub fn make_split(
    kind: SplitKind,
    g: &DirectedProductGraph,
    ratios: SplitRatios,
    seed: u64,
) -> Result<EvalSplit> {
    match kind {
        SplitKind::Edge => make_edge_split(g, ratios, seed),
        SplitKind::Node => make_node_split(g, ratios, seed),
        SplitKind::SelectionBias => make_selection_bias_split(g, ratios, seed),
    }
}

/// 1-based rank of `target` for query score vector `score(v)` among the
/// candidates accepted by `is_candidate`. Ties rank lower ids first.
/// Returns `None` when `target` is not a candidate.
pub fn rank_of<S, C>(num_nodes: usize, target: NodeId, score: S, is_candidate: C) -> Option<usize>
where
    S: Fn(NodeId) -> f64,
    C: Fn(NodeId) -> bool,
{
    if !is_candidate(target) {
        return None;
    }
    let st = score(target);
    let mut better = 0usize;
    for v in 0..num_nodes as NodeId {
        if v == target || !is_candidate(v) {
            continue;
        }
        let sv = score(v);
        if sv > st || (sv == st && v < target) {
            better += 1;
        }
    }
    Some(better + 1)
}

/// Filtered ranks of `v` for each test edge `(u, v)`: candidates are all
/// products allowed by `allowed` minus `u` and `u`'s training out-neighbors.
pub fn rank_edges(
    emb: &DualEmbeddings,
    edges: &[(NodeId, NodeId)],
    train_graph: Option<&DirectedProductGraph>,
    allowed: Option<&[bool]>,
) -> Vec<Option<usize>> {
    let n = emb.len();
    par::map_slice(edges, |&(u, v)| {
        let q = emb.source(u).expect("query embedded");
        rank_of(
            n,
            v,
            |c| linalg::dot(q, emb.theta_t.row(c as usize)),
            |c| {
                c != u
                    && allowed.is_none_or(|a| a[c as usize])
                    && train_graph.is_none_or(|g| !g.has_cp_edge(u, c))
            },
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankMetrics {
    pub k: usize,
    pub hit_rate: f64,
    pub mrr: f64,
}

/// HitRate@k and MRR@k over per-edge ranks (`None` = never retrieved).
pub fn hitrate_mrr(ranks: &[Option<usize>], ks: &[usize]) -> Vec<RankMetrics> {
    ks.iter()
        .map(|&k| {
            if ranks.is_empty() {
                return RankMetrics { k, hit_rate: 0.0, mrr: 0.0 };
            }
            let mut hits = 0usize;
            let mut rr = 0.0;
            for r in ranks.iter().flatten() {
                if *r <= k {
                    hits += 1;
                    rr += 1.0 / *r as f64;
                }
            }
            let n = ranks.len() as f64;
            RankMetrics {
                k,
                hit_rate: hits as f64 / n,
                mrr: rr / n,
            }
        })
        .collect()
}

/// Mann-Whitney AUC: probability a positive outscores a negative, ties 0.5.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Invalid(format!(
            "AUC needs both positives ({}) and negatives ({})",
            pos.len(),
            neg.len()
        )));
    }
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of (doubled) mid-ranks of positives, kept integral.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let mid2 = (i + 1 + j) as u128; // 2 * average of 1-based ranks i+1..=j
        let npos = all[i..j].iter().filter(|e| e.1).count() as u128;
        rank_sum2 += mid2 * npos;
        i = j;
    }
    let np = pos.len() as u128;
    let nn = neg.len() as u128;
    let u2 = rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / (2 * np * nn) as f64)
}

/// Existence AUC: positives scored against uniformly drawn non-edges.
pub fn auc_existence(scores_pos: &[f64], scores_neg: &[f64]) -> Result<f64> {
    auc(scores_pos, scores_neg)
}

/// Direction AUC: each one-way edge `(u, v)` scored `rel(u, v)` against its
/// reversal `rel(v, u)`.
pub fn auc_direction(emb: &DualEmbeddings, edges: &[(NodeId, NodeId)]) -> Result<f64> {
    let rel = |u, v| {
        emb.relevance(u, v)
            .ok_or_else(|| Error::Invalid(format!("edge ({u}, {v}) not embedded")))
    };
    let pos = edges.iter().map(|&(u, v)| rel(u, v)).collect::<Result<Vec<_>>>()?;
    let neg = edges.iter().map(|&(u, v)| rel(v, u)).collect::<Result<Vec<_>>>()?;
    auc(&pos, &neg)
}

/// `count` uniform ordered pairs `(u, v)`, `u != v`, that are not co-purchase edges of `g`.
pub fn sample_non_edges(g: &DirectedProductGraph, count: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let n = g.num_nodes() as NodeId;
    let mut rng = rng_for(seed, &[TAG_EVAL_NEG]);
    let mut out = Vec::with_capacity(count);
    if n < 2 {
        return out;
    }
    let max_pairs = n as usize * (n as usize - 1) - g.num_cp_edges();
    let count = count.min(max_pairs);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !g.has_cp_edge(u, v) {
            out.push((u, v));
        }
    }
    out
}

/// Metrics for one group of test edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGroup {
    pub name: String,
    pub count: usize,
    pub ranking: Vec<RankMetrics>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub task: String,
    pub notes: Vec<String>,
    pub groups: Vec<MetricGroup>,
}

impl MetricReport {
    pub fn group(&self, name: &str) -> Option<&MetricGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// `group\tmetric\tk\tvalue` rows after `#` note lines; byte-stable.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# task\t{}", self.task);
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "group\tmetric\tk\tvalue");
        for g in &self.groups {
            let _ = writeln!(s, "{}\tcount\t-\t{}", g.name, g.count);
            for m in &g.ranking {
                let _ = writeln!(s, "{}\thitrate\t{}\t{:.6}", g.name, m.k, m.hit_rate);
                let _ = writeln!(s, "{}\tmrr\t{}\t{:.6}", g.name, m.k, m.mrr);
            }
            if let Some(a) = g.auc {
                let _ = writeln!(s, "{}\tauc\t-\t{:.6}", g.name, a);
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = format!("task: {}\n", self.task);
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        for g in &self.groups {
            let _ = writeln!(s, "  [{}] {} edges", g.name, g.count);
            for m in &g.ranking {
                let _ = writeln!(
                    s,
                    "    HitRate@{:<2} {:.4}   MRR@{:<2} {:.4}",
                    m.k, m.hit_rate, m.k, m.mrr
                );
            }
            if let Some(a) = g.auc {
                let _ = writeln!(s, "    AUC        {a:.4}");
            }
        }
        s
    }
}

/// Evaluation task names accepted by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    NodeRec,
    LinkExistence,
    LinkDirection,
    ColdStart,
    SelectionBias,
}

impl Task {
    pub fn split_kind(self) -> SplitKind {
        match self {
            Task::ColdStart => SplitKind::Node,
            Task::SelectionBias => SplitKind::SelectionBias,
            _ => SplitKind::Edge,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::NodeRec => "node-rec",
            Task::LinkExistence => "lp-exist",
            Task::LinkDirection => "lp-dir",
            Task::ColdStart => "coldstart",
            Task::SelectionBias => "selection-bias",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            Task::NodeRec,
            Task::LinkExistence,
            Task::LinkDirection,
            Task::ColdStart,
            Task::SelectionBias,
        ]
        .into_iter()
        .find(|t| t.name() == s)
        .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

/// Everything an evaluation run needs besides the task.
pub struct EvalInputs<'a, F: FeatureRows + ?Sized> {
    pub graph: &'a DirectedProductGraph,
    pub features: &'a F,
    pub params: &'a ModelParams,
    pub split: &'a EvalSplit,
    /// Whether co-view pairs are part of the inference graph.
    pub use_cv: bool,
    pub batch_size: usize,
    pub seed: u64,
    pub ks: &'a [usize],
    pub coldstart: ColdStartConfig,
}

fn ranking_group(
    name: &str,
    emb: &DualEmbeddings,
    edges: &[(NodeId, NodeId)],
    train_graph: &DirectedProductGraph,
    allowed: Option<&[bool]>,
    ks: &[usize],
) -> MetricGroup {
    let ranks = rank_edges(emb, edges, Some(train_graph), allowed);
    MetricGroup {
        name: name.to_string(),
        count: edges.len(),
        ranking: hitrate_mrr(&ranks, ks),
        auc: None,
    }
}

pub fn evaluate<F: FeatureRows + ?Sized>(task: Task, inp: &EvalInputs<'_, F>) -> Result<MetricReport> {
    if inp.split.kind != task.split_kind() {
        return Err(Error::Invalid(format!(
            "task {} needs a {} split, got {}",
            task.name(),
            task.split_kind(),
            inp.split.kind
        )));
    }
    let train_graph = inp.split.train_graph(inp.use_cv);
    let mut notes = vec![
        "inference graph: training co-purchase edges only (validation and test edges withheld)"
            .to_string(),
        format!("co-view pairs in inference graph: {}", if inp.use_cv { "yes" } else { "no" }),
        "ranking candidates: all products minus the query and its training co-purchase out-neighbors"
            .to_string(),
    ];
    let groups = match task {
        Task::NodeRec => {
            let emb = embed_all(&train_graph, inp.features, inp.params, inp.batch_size)?;
            vec![ranking_group("test", &emb, &inp.split.test_cp, &train_graph, None, inp.ks)]
        }
        Task::SelectionBias => {
            let emb = embed_all(&train_graph, inp.features, inp.params, inp.batch_size)?;
            notes.push(format!(
                "synthesized transitive edges: {} kept of {} (cap = |test| = {})",
                inp.split.synthesized.len(),
                inp.split.synthesized_before_cap,
                inp.split.test_cp.len()
            ));
            vec![
                ranking_group("test", &emb, &inp.split.test_cp, &train_graph, None, inp.ks),
                ranking_group("transitive", &emb, &inp.split.synthesized, &train_graph, None, inp.ks),
                ranking_group("all", &emb, &inp.split.all_test_edges(), &train_graph, None, inp.ks),
            ]
        }
        Task::LinkExistence => {
            let emb = embed_all(&train_graph, inp.features, inp.params, inp.batch_size)?;
            let negs = sample_non_edges(inp.graph, inp.split.test_cp.len(), inp.seed);
            notes.push(format!("negatives: {} uniform non-edges (1:1)", negs.len()));
            let score = |&(u, v): &(NodeId, NodeId)| emb.relevance(u, v).expect("embedded");
            let pos: Vec<f64> = inp.split.test_cp.iter().map(score).collect();
            let neg: Vec<f64> = negs.iter().map(score).collect();
            vec![MetricGroup {
                name: "test".into(),
                count: pos.len(),
                ranking: Vec::new(),
                auc: Some(auc_existence(&pos, &neg)?),
            }]
        }
        Task::LinkDirection => {
            let emb = embed_all(&train_graph, inp.features, inp.params, inp.batch_size)?;
            let one_way: Vec<_> = inp
                .split
                .test_cp
                .iter()
                .copied()
                .filter(|&(u, v)| inp.graph.is_one_way(u, v))
                .collect();
            notes.push("negatives: reversed one-way test edges".into());
            vec![MetricGroup {
                name: "test".into(),
                count: one_way.len(),
                ranking: Vec::new(),
                auc: Some(auc_direction(&emb, &one_way)?),
            }]
        }
        Task::ColdStart => {
            let warm = embed_all(&train_graph, inp.features, inp.params, inp.batch_size)?;
            let is_train = inp.split.is_train_node();
            notes.push(format!(
                "cold products attach to {} feature neighbors among training nodes",
                inp.coldstart.k_sim
            ));
            // Embed each test query once, then rank its edges.
            let mut queries: Vec<NodeId> = inp.split.test_cp.iter().map(|e| e.0).collect();
            queries.dedup();
            let cold: Vec<Result<Vec<f64>>> = par::map_slice(&queries, |&q| {
                let c = attach_and_embed(
                    &train_graph,
                    inp.features,
                    inp.params,
                    inp.features.row(q as usize),
                    Some(&is_train),
                    &inp.coldstart,
                )?;
                Ok(c.theta_s)
            });
            let cold = cold.into_iter().collect::<Result<Vec<_>>>()?;
            let ranks: Vec<Option<usize>> = inp
                .split
                .test_cp
                .iter()
                .map(|&(u, v)| {
                    let qi = queries.binary_search(&u).expect("query embedded");
                    let q = &cold[qi];
                    rank_of(
                        warm.len(),
                        v,
                        |c| linalg::dot(q, warm.theta_t.row(c as usize)),
                        |c| is_train[c as usize],
                    )
                })
                .collect();
            vec![MetricGroup {
                name: "test".into(),
                count: ranks.len(),
                ranking: hitrate_mrr(&ranks, inp.ks),
                auc: None,
            }]
        }
    };
    Ok(MetricReport {
        task: task.name().to_string(),
        notes,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_graph(n: u32) -> DirectedProductGraph {
        let cp: Vec<_> = (0..n).flat_map(|u| (1..=4).map(move |d| (u, (u + d * 7) % n))).collect();
        let cv: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        DirectedProductGraph::build(n as usize, &cp, &cv).unwrap()
    }

    #[test]
    fn edge_split_counts_and_determinism() {
        let cp: Vec<_> = (0..100u32).map(|i| (i, (i + 1) % 100)).collect();
        let g = DirectedProductGraph::build(100, &cp, &[]).unwrap();
        let s = make_edge_split(&g, SplitRatios::default(), 3).unwrap();
        assert_eq!((s.train_cp.len(), s.val_cp.len(), s.test_cp.len()), (75, 5, 20));
        assert_eq!(s, make_edge_split(&g, SplitRatios::default(), 3).unwrap());
        assert!(s.test_cp.iter().all(|e| !s.train_cp.contains(e)));
        assert!(s.val_cp.iter().all(|e| !s.train_cp.contains(e) && !s.test_cp.contains(e)));
    }

    #[test]
    fn bad_ratios_rejected() {
        let g = sample_graph(10);
        let r = SplitRatios { train: 0.7, val: 0.1, test: 0.1 };
        assert!(make_edge_split(&g, r, 0).is_err());
    }

    #[test]
    fn transitive_edge_synthesized() {
        // a=0 -cp-> b=1, b ~cv~ c=2; force (0,1) into train with ratios 1/0/0
        let g = DirectedProductGraph::build(3, &[(0, 1)], &[(1, 2)]).unwrap();
        let r = SplitRatios { train: 1.0, val: 0.0, test: 0.0 };
        let s = make_selection_bias_split(&g, r, 0).unwrap();
        assert_eq!(s.synthesized_before_cap, 1);
        // capped at |test| = 0
        assert!(s.synthesized.is_empty());

        let g = DirectedProductGraph::build(5, &[(0, 1), (3, 4)], &[(1, 2)]).unwrap();
        let r = SplitRatios { train: 0.5, val: 0.0, test: 0.5 };
        for seed in 0..20 {
            let s = make_selection_bias_split(&g, r, seed).unwrap();
            if s.train_cp.contains(&(0, 1)) {
                assert_eq!(s.synthesized, vec![(0, 2)]);
            } else {
                assert!(s.synthesized.is_empty());
            }
        }
    }

    #[test]
    fn no_synthesis_without_cv_or_when_edge_exists() {
        let g = DirectedProductGraph::build(2, &[(0, 1)], &[]).unwrap();
        let r = SplitRatios { train: 1.0, val: 0.0, test: 0.0 };
        assert_eq!(make_selection_bias_split(&g, r, 0).unwrap().synthesized_before_cap, 0);
        let g = DirectedProductGraph::build(3, &[(0, 1), (0, 2)], &[(1, 2)]).unwrap();
        let s = make_selection_bias_split(&g, r, 0).unwrap();
        assert_eq!(s.synthesized_before_cap, 0);
    }

    #[test]
    fn node_split_partitions() {
        let g = sample_graph(40);
        let s = make_node_split(&g, SplitRatios::default(), 5).unwrap();
        assert_eq!((s.train_nodes.len(), s.val_nodes.len(), s.test_nodes.len()), (30, 2, 8));
        let train = s.is_train_node();
        let tg = s.train_graph(true);
        for (u, v) in tg.cp_edges().into_iter().chain(tg.cv_pairs()) {
            assert!(train[u as usize] && train[v as usize]);
        }
        for &(u, v) in &s.test_cp {
            assert!(s.test_nodes.binary_search(&u).is_ok() && train[v as usize]);
        }
    }

    #[test]
    fn rank_and_metrics_examples() {
        let ranks = [Some(3)];
        let m = hitrate_mrr(&ranks, &[5]);
        assert_eq!((m[0].hit_rate, m[0].mrr), (1.0, 1.0 / 3.0));
        let m = hitrate_mrr(&[Some(7)], &[5]);
        assert_eq!((m[0].hit_rate, m[0].mrr), (0.0, 0.0));
        let m = hitrate_mrr(&[Some(1), None], &[10]);
        assert_eq!((m[0].hit_rate, m[0].mrr), (0.5, 0.5));
    }

    #[test]
    fn rank_breaks_ties_by_id() {
        let scores = [0.5, 0.9, 0.5, 0.5];
        let r = rank_of(4, 2, |v| scores[v as usize], |_| true);
        assert_eq!(r, Some(3)); // 1 (0.9) and 0 (tie, lower id) come first
        assert_eq!(rank_of(4, 2, |v| scores[v as usize], |v| v != 2), None);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5], &[0.5]).unwrap(), 0.5);
        assert_eq!(auc(&[0.2], &[0.8]).unwrap(), 0.0);
        assert!(auc(&[], &[0.1]).is_err());
        assert!(auc(&[0.1], &[]).is_err());
    }

    #[test]
    fn non_edges_are_non_edges() {
        let g = sample_graph(30);
        let ne = sample_non_edges(&g, 200, 1);
        assert_eq!(ne.len(), 200);
        assert!(ne.iter().all(|&(u, v)| u != v && !g.has_cp_edge(u, v)));
        assert_eq!(ne, sample_non_edges(&g, 200, 1));
    }

    #[test]
    fn report_tsv_is_stable() {
        let r = MetricReport {
            task: "node-rec".into(),
            notes: vec!["x".into()],
            groups: vec![MetricGroup {
                name: "test".into(),
                count: 2,
                ranking: hitrate_mrr(&[Some(1), None], &[5]),
                auc: Some(0.75),
            }],
        };
        assert_eq!(
            r.to_tsv(),
            "# task\tnode-rec\n# x\ngroup\tmetric\tk\tvalue\ntest\tcount\t-\t2\n\
             test\thitrate\t5\t0.500000\ntest\tmrr\t5\t0.500000\ntest\tauc\t-\t0.750000\n"
        );
    }
}
