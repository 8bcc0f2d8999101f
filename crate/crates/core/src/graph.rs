//! Directed heterogeneous product graph over co-purchase and co-view relations.
//!
//! Co-purchase edges keep their direction. Co-view edges are a symmetric
//! relation and are stored in both directions. Adjacency is kept in four
//! compressed row arrays (cp out/in, cv out/in) with each row sorted by
//! neighbor id, which fixes the accumulation order downstream.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense product index, `0..num_nodes`.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    CoPurchase,
    CoView,
}

impl RelationKind {
    pub fn tag(self) -> &'static str {
        match self {
            RelationKind::CoPurchase => "cp",
            RelationKind::CoView => "cv",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cp" => Ok(RelationKind::CoPurchase),
            "cv" => Ok(RelationKind::CoView),
            other => Err(format!("unknown relation kind {other:?} (expected cp or cv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
}

/// Bijection between external product keys and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyMap {
    keys: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl KeyMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `key`, assigning the next dense id if it is new.
    pub fn intern(&mut self, key: &str) -> NodeId {
        if let Some(&id) = self.index.get(key) {
            return id;
        }
        let id = self.keys.len() as NodeId;
        self.keys.push(key.to_owned());
        self.index.insert(key.to_owned(), id);
        id
    }

    /// Inserts a key that must not already exist.
    pub fn insert_new(&mut self, key: &str) -> Result<NodeId> {
        if self.index.contains_key(key) {
            return Err(Error::Invalid(format!("duplicate product key {key:?}")));
        }
        Ok(self.intern(key))
    }

    pub fn id(&self, key: &str) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn key(&self, id: NodeId) -> Option<&str> {
        self.keys.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }
}

/// Compressed sparse rows: `targets[offsets[u]..offsets[u + 1]]`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Csr {
    /// `pairs` must be sorted by (row, col) and deduplicated.
    fn from_sorted(num_nodes: usize, pairs: &[(NodeId, NodeId)]) -> Self {
        let mut offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.iter().map(|&(_, v)| v).collect();
        Self { offsets, targets }
    }

    #[inline]
    fn row(&self, u: usize) -> &[NodeId] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    fn len(&self) -> usize {
        self.targets.len()
    }

    fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.offsets.len() - 1)
            .flat_map(move |u| self.row(u).iter().map(move |&v| (u as NodeId, v)))
    }
}

/// Read-only neighbor access shared by the base graph and cold-start overlays.
pub trait Adjacency: Sync {
    fn num_nodes(&self) -> usize;

    /// Sorted neighbor ids. Panics if `u` is out of range.
    fn neighbors_of(&self, u: NodeId, kind: RelationKind, dir: Direction) -> Cow<'_, [NodeId]>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedProductGraph {
    num_nodes: usize,
    cp_out: Csr,
    cp_in: Csr,
    cv_out: Csr,
    cv_in: Csr,
}

/// Summary statistics in the shape of a dataset table row.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub num_nodes: usize,
    /// Directed co-purchase edges.
    pub cp_edges: usize,
    /// Unordered co-view pairs.
    pub cv_pairs: usize,
    /// Co-purchase edges whose reverse is absent.
    pub one_way_cp_edges: usize,
    /// `(cp_edges + cv_pairs) / num_nodes`.
    pub avg_degree: f64,
    /// Share of connected unordered co-purchase pairs linked in one direction only.
    pub directed_share: f64,
}

impl DirectedProductGraph {
    /// Builds a graph from dense-id pairs. Duplicates and self-pairs are
    /// dropped; co-view pairs are materialized in both directions.
    pub fn build(
        num_nodes: usize,
        cp_pairs: &[(NodeId, NodeId)],
        cv_pairs: &[(NodeId, NodeId)],
    ) -> Result<Self> {
        let check = |&(u, v): &(NodeId, NodeId)| -> Result<()> {
            for id in [u, v] {
                if id as usize >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        id: id as u64,
                        num_nodes,
                    });
                }
            }
            Ok(())
        };
        cp_pairs.iter().try_for_each(check)?;
        cv_pairs.iter().try_for_each(check)?;

        let mut cp: Vec<(NodeId, NodeId)> =
            cp_pairs.iter().copied().filter(|(u, v)| u != v).collect();
        cp.sort_unstable();
        cp.dedup();

        let mut cv: Vec<(NodeId, NodeId)> = cv_pairs
            .iter()
            .filter(|(u, v)| u != v)
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect();
        cv.sort_unstable();
        cv.dedup();

        let cp_out = Csr::from_sorted(num_nodes, &cp);
        let cv_out = Csr::from_sorted(num_nodes, &cv);
        let mut cp_rev: Vec<_> = cp.iter().map(|&(u, v)| (v, u)).collect();
        cp_rev.sort_unstable();
        let cp_in = Csr::from_sorted(num_nodes, &cp_rev);
        // cv is symmetric, so the in-view is the out-view.
        let cv_in = cv_out.clone();

        Ok(Self {
            num_nodes,
            cp_out,
            cp_in,
            cv_out,
            cv_in,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self::build(num_nodes, &[], &[]).expect("empty graph is valid")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    fn csr(&self, kind: RelationKind, dir: Direction) -> &Csr {
        match (kind, dir) {
            (RelationKind::CoPurchase, Direction::Out) => &self.cp_out,
            (RelationKind::CoPurchase, Direction::In) => &self.cp_in,
            (RelationKind::CoView, Direction::Out) => &self.cv_out,
            (RelationKind::CoView, Direction::In) => &self.cv_in,
        }
    }

    /// Checked neighbor lookup.
    pub fn neighbors(&self, u: NodeId, kind: RelationKind, dir: Direction) -> Result<&[NodeId]> {
        if u as usize >= self.num_nodes {
            return Err(Error::NodeOutOfRange {
                id: u as u64,
                num_nodes: self.num_nodes,
            });
        }
        Ok(self.csr(kind, dir).row(u as usize))
    }

    #[inline]
    pub fn cp_out(&self, u: NodeId) -> &[NodeId] {
        self.cp_out.row(u as usize)
    }

    #[inline]
    pub fn cp_in(&self, u: NodeId) -> &[NodeId] {
        self.cp_in.row(u as usize)
    }

    #[inline]
    pub fn cv(&self, u: NodeId) -> &[NodeId] {
        self.cv_out.row(u as usize)
    }

    pub fn has_cp_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.num_nodes && self.cp_out(u).binary_search(&v).is_ok()
    }

    pub fn has_cv_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.num_nodes && self.cv(u).binary_search(&v).is_ok()
    }

    pub fn num_cp_edges(&self) -> usize {
        self.cp_out.len()
    }

    /// Number of unordered co-view pairs.
    pub fn num_cv_pairs(&self) -> usize {
        self.cv_out.len() / 2
    }

    /// All co-purchase edges sorted by (u, v).
    pub fn cp_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.cp_out.pairs().collect()
    }

    /// Co-view pairs as `(u, v)` with `u < v`, sorted.
    pub fn cv_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.cv_out.pairs().filter(|(u, v)| u < v).collect()
    }

    /// Co-purchase edges whose reverse is absent, sorted by (u, v).
    pub fn one_way_cp_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.cp_out
            .pairs()
            .filter(|&(u, v)| !self.has_cp_edge(v, u))
            .collect()
    }

    pub fn is_one_way(&self, u: NodeId, v: NodeId) -> bool {
        !self.has_cp_edge(v, u)
    }

    /// Same nodes, same co-purchase edges, no co-view edges.
    pub fn without_cv(&self) -> Self {
        Self {
            num_nodes: self.num_nodes,
            cp_out: self.cp_out.clone(),
            cp_in: self.cp_in.clone(),
            cv_out: Csr::from_sorted(self.num_nodes, &[]),
            cv_in: Csr::from_sorted(self.num_nodes, &[]),
        }
    }

    /// Keeps node ids, drops every edge with an endpoint outside `keep`.
    pub fn induced(&self, keep: &[bool]) -> Self {
        let inside = |&(u, v): &(NodeId, NodeId)| keep[u as usize] && keep[v as usize];
        let cp: Vec<_> = self.cp_edges().into_iter().filter(inside).collect();
        let cv: Vec<_> = self.cv_pairs().into_iter().filter(inside).collect();
        Self::build(self.num_nodes, &cp, &cv).expect("ids already validated")
    }

    pub fn stats(&self) -> GraphStats {
        let cp_edges = self.num_cp_edges();
        let cv_pairs = self.num_cv_pairs();
        let one_way = self.one_way_cp_edges().len();
        let reciprocal_pairs = (cp_edges - one_way) / 2;
        let cp_pairs = one_way + reciprocal_pairs;
        GraphStats {
            num_nodes: self.num_nodes,
            cp_edges,
            cv_pairs,
            one_way_cp_edges: one_way,
            avg_degree: if self.num_nodes == 0 {
                0.0
            } else {
                (cp_edges + cv_pairs) as f64 / self.num_nodes as f64
            },
            directed_share: if cp_pairs == 0 {
                0.0
            } else {
                one_way as f64 / cp_pairs as f64
            },
        }
    }
}

impl Adjacency for DirectedProductGraph {
    fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    fn neighbors_of(&self, u: NodeId, kind: RelationKind, dir: Direction) -> Cow<'_, [NodeId]> {
        Cow::Borrowed(self.csr(kind, dir).row(u as usize))
    }
}

/// One parsed line of an edge file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub line: usize,
    pub src: String,
    pub dst: String,
    pub kind: RelationKind,
}

/// Parses `<src>\t<dst>\t<cp|cv>` lines; blank lines and `#` comments are skipped.
pub fn read_edge_records<R: BufRead>(reader: R, path: &str) -> Result<Vec<EdgeRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::parse(path, line_no, "empty product key"));
        }
        let kind = fields[2]
            .parse::<RelationKind>()
            .map_err(|e| Error::parse(path, line_no, e))?;
        out.push(EdgeRecord {
            line: line_no,
            src: fields[0].to_owned(),
            dst: fields[1].to_owned(),
            kind,
        });
    }
    Ok(out)
}

/// Maps records through `keys` and builds the graph. Every unknown key is
/// reported with its line number.
pub fn ingest(records: &[EdgeRecord], keys: &KeyMap) -> Result<DirectedProductGraph> {
    let mut cp = Vec::new();
    let mut cv = Vec::new();
    let mut bad_lines = Vec::new();
    for rec in records {
        match (keys.id(&rec.src), keys.id(&rec.dst)) {
            (Some(u), Some(v)) => match rec.kind {
                RelationKind::CoPurchase => cp.push((u, v)),
                RelationKind::CoView => cv.push((u, v)),
            },
            _ => bad_lines.push(rec.line),
        }
    }
    if !bad_lines.is_empty() {
        return Err(Error::UnknownKeys { lines: bad_lines });
    }
    DirectedProductGraph::build(keys.len(), &cp, &cv)
}

/// Assigns ids in first-appearance order; used when no feature file fixes the universe.
pub fn keys_from_records(records: &[EdgeRecord]) -> KeyMap {
    let mut keys = KeyMap::new();
    for rec in records {
        keys.intern(&rec.src);
        keys.intern(&rec.dst);
    }
    keys
}

/// Writes the graph in edge-file format: co-purchase edges sorted by (u, v),
/// then co-view pairs once each with `u < v`.
pub fn write_edges<W: Write>(
    mut w: W,
    graph: &DirectedProductGraph,
    keys: &KeyMap,
) -> Result<()> {
    let key = |id: NodeId| keys.key(id).expect("graph ids are covered by the key map");
    for (u, v) in graph.cp_edges() {
        writeln!(w, "{}\t{}\tcp", key(u), key(v))?;
    }
    for (u, v) in graph.cv_pairs() {
        writeln!(w, "{}\t{}\tcv", key(u), key(v))?;
    }
    Ok(())
}
