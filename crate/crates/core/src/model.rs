//! Dual-embedding GNN: forward pass, reverse-mode gradients, batch inference.
//!
//! Layer `l` computes, for every destination node `u`,
//!
//! ```text
//! s_u = relu(Σ_{cp out} t_v W) + relu(Σ_{cv out} s_v W)
//! t_u = relu(Σ_{cp in}  s_v W) + relu(Σ_{cv in}  t_v W)
//! ```
//!
//! followed by L2 row normalization. A single `W` per layer is shared by both
//! channels and both relations. Rows whose pre-normalization vector is zero
//! stay zero (no residual or self term exists, so isolated directions embed
//! to zero).

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::features::{write_floats, FeatureRows};
use crate::graph::{Adjacency, KeyMap, NodeId};
use crate::linalg::{self, Matrix};
use crate::par;
use crate::sampler::{full_blocks, sample_blocks, Channel, ComputationBlocks, Fanouts, LayerBlock, Slot};
use crate::seed::{rng_for, TAG_INIT};

/// Rows per partial sum when reducing weight gradients. Fixed so the
/// reduction order does not depend on the thread count.
const REDUCE_CHUNK: usize = 64;

/// Per destination row: ReLU-masked gradients and gradients w.r.t. the
/// aggregated inputs, one entry per slot.
type RowGrads = ([Vec<f64>; 4], [Vec<f64>; 4]);

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    weights: Vec<Matrix>,
}

impl ModelParams {
    pub fn new(weights: Vec<Matrix>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("model needs at least one layer".into()));
        }
        let d_h = weights[0].cols();
        for (l, w) in weights.iter().enumerate() {
            if w.cols() != d_h || (l > 0 && w.rows() != d_h) {
                return Err(Error::Shape(format!(
                    "layer {} weight is {}x{}, expected {}x{d_h}",
                    l + 1,
                    w.rows(),
                    w.cols(),
                    if l == 0 { w.rows() } else { d_h }
                )));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("layer {} weights", l + 1)));
            }
        }
        Ok(Self { weights })
    }

    /// Glorot-uniform initialization.
    pub fn init(d_in: usize, d_h: usize, layers: usize, seed: u64) -> Self {
        let weights = (0..layers)
            .map(|l| {
                let rows = if l == 0 { d_in } else { d_h };
                let limit = (6.0 / (rows + d_h) as f64).sqrt();
                let mut rng = rng_for(seed, &[TAG_INIT, l as u64]);
                let data = (0..rows * d_h)
                    .map(|_| rng.random_range(-limit..limit))
                    .collect();
                Matrix::from_vec(rows, d_h, data).expect("sizes match")
            })
            .collect();
        Self { weights }
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn d_in(&self) -> usize {
        self.weights[0].rows()
    }

    pub fn d_h(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum()
    }
}

/// Source and target embeddings for a set of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEmbeddings {
    ids: Vec<NodeId>,
    position: HashMap<NodeId, usize>,
    pub theta_s: Matrix,
    pub theta_t: Matrix,
}

impl DualEmbeddings {
    pub fn new(ids: Vec<NodeId>, theta_s: Matrix, theta_t: Matrix) -> Result<Self> {
        if theta_s.rows() != ids.len()
            || theta_t.rows() != ids.len()
            || theta_s.cols() != theta_t.cols()
        {
            return Err(Error::Shape(format!(
                "{} ids with {}x{} source and {}x{} target embeddings",
                ids.len(),
                theta_s.rows(),
                theta_s.cols(),
                theta_t.rows(),
                theta_t.cols()
            )));
        }
        let position = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Ok(Self {
            ids,
            position,
            theta_s,
            theta_t,
        })
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.theta_s.cols()
    }

    pub fn row_of(&self, id: NodeId) -> Option<usize> {
        self.position.get(&id).copied()
    }

    pub fn source(&self, id: NodeId) -> Option<&[f64]> {
        self.row_of(id).map(|r| self.theta_s.row(r))
    }

    pub fn target(&self, id: NodeId) -> Option<&[f64]> {
        self.row_of(id).map(|r| self.theta_t.row(r))
    }

    /// `θ^s_q · θ^t_v`
    pub fn relevance(&self, q: NodeId, v: NodeId) -> Option<f64> {
        Some(linalg::dot(self.source(q)?, self.target(v)?))
    }
}

/// Gradients of a scalar loss with respect to every weight matrix and to the
/// input features of `blocks.input_nodes()`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub weights: Vec<Matrix>,
    pub features: Matrix,
}

/// Intermediate values of one layer, rows aligned with `LayerBlock::dst`.
#[derive(Debug, Clone)]
struct LayerTape {
    agg: [Matrix; 4],
    pre: [Matrix; 4],
    out_s: Matrix,
    out_t: Matrix,
    norm_s: Vec<f64>,
    norm_t: Vec<f64>,
}

/// Saved activations of a forward pass, consumed by [`backward_tape`].
#[derive(Debug, Clone)]
pub struct Tape {
    layers: Vec<LayerTape>,
}

struct RowOut {
    agg: [Vec<f64>; 4],
    pre: [Vec<f64>; 4],
    out_s: Vec<f64>,
    out_t: Vec<f64>,
    norm_s: f64,
    norm_t: f64,
}

fn relu_into(z: &[f64], acc: &mut [f64]) {
    for (a, &v) in acc.iter_mut().zip(z) {
        if v > 0.0 {
            *a += v;
        }
    }
}

fn normalize(u: &mut [f64]) -> f64 {
    let n = linalg::norm(u);
    if n > 0.0 {
        u.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn layer_forward(
    block: &LayerBlock,
    prev_s: &Matrix,
    prev_t: &Matrix,
    w: &Matrix,
) -> LayerTape {
    let d_prev = w.rows();
    let d_out = w.cols();
    let rows: Vec<RowOut> = par::map_range(block.dst.len(), |i| {
        let mut agg: [Vec<f64>; 4] = Default::default();
        let mut pre: [Vec<f64>; 4] = Default::default();
        let mut out_s = vec![0.0; d_out];
        let mut out_t = vec![0.0; d_out];
        for slot in Slot::ALL {
            let prev = match slot.reads() {
                Channel::Source => prev_s,
                Channel::Target => prev_t,
            };
            let mut a = vec![0.0; d_prev];
            for &j in block.lists(slot).get(i) {
                for (x, y) in a.iter_mut().zip(prev.row(j as usize)) {
                    *x += y;
                }
            }
            let mut z = vec![0.0; d_out];
            linalg::row_times(&a, w, &mut z);
            match slot.feeds() {
                Channel::Source => relu_into(&z, &mut out_s),
                Channel::Target => relu_into(&z, &mut out_t),
            }
            agg[slot as usize] = a;
            pre[slot as usize] = z;
        }
        let norm_s = normalize(&mut out_s);
        let norm_t = normalize(&mut out_t);
        RowOut {
            agg,
            pre,
            out_s,
            out_t,
            norm_s,
            norm_t,
        }
    });

    let n = rows.len();
    let mut tape = LayerTape {
        agg: std::array::from_fn(|_| Matrix::zeros(n, d_prev)),
        pre: std::array::from_fn(|_| Matrix::zeros(n, d_out)),
        out_s: Matrix::zeros(n, d_out),
        out_t: Matrix::zeros(n, d_out),
        norm_s: Vec::with_capacity(n),
        norm_t: Vec::with_capacity(n),
    };
    for (i, r) in rows.into_iter().enumerate() {
        for k in 0..4 {
            tape.agg[k].row_mut(i).copy_from_slice(&r.agg[k]);
            tape.pre[k].row_mut(i).copy_from_slice(&r.pre[k]);
        }
        tape.out_s.row_mut(i).copy_from_slice(&r.out_s);
        tape.out_t.row_mut(i).copy_from_slice(&r.out_t);
        tape.norm_s.push(r.norm_s);
        tape.norm_t.push(r.norm_t);
    }
    tape
}

fn gather_features<F: FeatureRows + ?Sized>(features: &F, nodes: &[NodeId]) -> Matrix {
    let d = features.dim();
    let mut m = Matrix::zeros(nodes.len(), d);
    for (i, &v) in nodes.iter().enumerate() {
        m.row_mut(i).copy_from_slice(features.row(v as usize));
    }
    m
}

fn check_shapes<F: FeatureRows + ?Sized>(
    blocks: &ComputationBlocks,
    features: &F,
    params: &ModelParams,
) -> Result<()> {
    if blocks.num_layers() != params.layers() {
        return Err(Error::Shape(format!(
            "blocks have {} layers but the model has {}",
            blocks.num_layers(),
            params.layers()
        )));
    }
    if features.dim() != params.d_in() {
        return Err(Error::Shape(format!(
            "features have dimension {} but the model expects {}",
            features.dim(),
            params.d_in()
        )));
    }
    if let Some(&bad) = blocks
        .input_nodes()
        .iter()
        .find(|&&v| v as usize >= features.num_rows())
    {
        return Err(Error::Shape(format!(
            "node {bad} has no feature row ({} rows)",
            features.num_rows()
        )));
    }
    Ok(())
}

/// Forward pass that also records what the backward pass needs.
pub fn forward_tape<F: FeatureRows + ?Sized>(
    blocks: &ComputationBlocks,
    features: &F,
    params: &ModelParams,
) -> Result<(DualEmbeddings, Tape)> {
    check_shapes(blocks, features, params)?;
    let x = gather_features(features, blocks.input_nodes());
    let mut layers: Vec<LayerTape> = Vec::with_capacity(blocks.num_layers());
    for (l, (block, w)) in blocks.layers.iter().zip(params.weights()).enumerate() {
        let tape = match layers.last() {
            None => layer_forward(block, &x, &x, w),
            Some(prev) => layer_forward(block, &prev.out_s, &prev.out_t, w),
        };
        // An overflowing norm would silently zero its row, so it counts too.
        let norms_finite = tape.norm_s.iter().chain(&tape.norm_t).all(|n| n.is_finite());
        if !(norms_finite && tape.out_s.is_finite() && tape.out_t.is_finite()) {
            return Err(Error::NonFinite(format!("activations at layer {}", l + 1)));
        }
        layers.push(tape);
    }
    let last = layers.last().expect("at least one layer");
    let emb = DualEmbeddings::new(
        blocks.seeds().to_vec(),
        last.out_s.clone(),
        last.out_t.clone(),
    )?;
    Ok((emb, Tape { layers }))
}

/// Embeddings of `blocks.seeds()`, rows in seed order.
pub fn forward<F: FeatureRows + ?Sized>(
    blocks: &ComputationBlocks,
    features: &F,
    params: &ModelParams,
) -> Result<DualEmbeddings> {
    forward_tape(blocks, features, params).map(|(e, _)| e)
}

/// Gradient through `h = u / ‖u‖`; zero when `u` was zero.
fn normalize_backward(h: &[f64], norm: f64, g: &[f64]) -> Vec<f64> {
    if norm == 0.0 {
        return vec![0.0; h.len()];
    }
    let hg = linalg::dot(h, g);
    h.iter().zip(g).map(|(hi, gi)| (gi - hi * hg) / norm).collect()
}

/// Reverse pass given `∂loss/∂θ^s` and `∂loss/∂θ^t` for the seed rows.
pub fn backward_tape(
    blocks: &ComputationBlocks,
    tape: &Tape,
    params: &ModelParams,
    grad_s: &Matrix,
    grad_t: &Matrix,
) -> Result<GradientSet> {
    let n_seeds = blocks.seeds().len();
    let d_h = params.d_h();
    if (grad_s.rows(), grad_s.cols()) != (n_seeds, d_h)
        || (grad_t.rows(), grad_t.cols()) != (n_seeds, d_h)
    {
        return Err(Error::Shape(format!(
            "loss gradients must be {n_seeds}x{d_h}, got {}x{} and {}x{}",
            grad_s.rows(),
            grad_s.cols(),
            grad_t.rows(),
            grad_t.cols()
        )));
    }

    let mut d_weights: Vec<Matrix> = params
        .weights()
        .iter()
        .map(|w| Matrix::zeros(w.rows(), w.cols()))
        .collect();
    let mut g_s = grad_s.clone();
    let mut g_t = grad_t.clone();

    for l in (0..blocks.num_layers()).rev() {
        let block = &blocks.layers[l];
        let lt = &tape.layers[l];
        let w = &params.weights()[l];
        let (d_prev, d_out) = (w.rows(), w.cols());

        // Per-row: gradients w.r.t. pre-activations and aggregated inputs.
        let per_row: Vec<RowGrads> = par::map_range(block.dst.len(), |i| {
            let du_s = normalize_backward(lt.out_s.row(i), lt.norm_s[i], g_s.row(i));
            let du_t = normalize_backward(lt.out_t.row(i), lt.norm_t[i], g_t.row(i));
            let mut dz: [Vec<f64>; 4] = Default::default();
            let mut da: [Vec<f64>; 4] = Default::default();
            for slot in Slot::ALL {
                let du = match slot.feeds() {
                    Channel::Source => &du_s,
                    Channel::Target => &du_t,
                };
                let z = lt.pre[slot as usize].row(i);
                let dzk: Vec<f64> = du
                    .iter()
                    .zip(z)
                    .map(|(&g, &zv)| if zv > 0.0 { g } else { 0.0 })
                    .collect();
                let mut dak = vec![0.0; d_prev];
                linalg::row_times_transpose(&dzk, w, &mut dak);
                dz[slot as usize] = dzk;
                da[slot as usize] = dak;
            }
            (dz, da)
        });

        // dW = Σ_rows Σ_slots aggᵀ dz, reduced in fixed-size chunks.
        let n_rows = block.dst.len();
        let n_chunks = n_rows.div_ceil(REDUCE_CHUNK);
        let partials: Vec<Matrix> = par::map_range(n_chunks, |c| {
            let mut acc = Matrix::zeros(d_prev, d_out);
            let (lo, hi) = (c * REDUCE_CHUNK, ((c + 1) * REDUCE_CHUNK).min(n_rows));
            for (i, row) in (lo..hi).zip(&per_row[lo..hi]) {
                for k in 0..4 {
                    linalg::add_outer(&mut acc, lt.agg[k].row(i), &row.0[k]);
                }
            }
            acc
        });
        for p in &partials {
            d_weights[l].add_assign(p);
        }

        // Scatter to the previous layer's rows.
        let mut prev_s = Matrix::zeros(block.src.len(), d_prev);
        let mut prev_t = Matrix::zeros(block.src.len(), d_prev);
        for (i, (_, da)) in per_row.iter().enumerate() {
            for slot in Slot::ALL {
                let target = match slot.reads() {
                    Channel::Source => &mut prev_s,
                    Channel::Target => &mut prev_t,
                };
                for &j in block.lists(slot).get(i) {
                    for (x, y) in target.row_mut(j as usize).iter_mut().zip(&da[slot as usize]) {
                        *x += y;
                    }
                }
            }
        }
        g_s = prev_s;
        g_t = prev_t;

        if !d_weights[l].is_finite() {
            return Err(Error::NonFinite(format!("weight gradient at layer {}", l + 1)));
        }
    }

    // Layer 0 feeds both channels from the same feature row.
    let mut d_features = g_s;
    d_features.add_assign(&g_t);
    Ok(GradientSet {
        weights: d_weights,
        features: d_features,
    })
}

/// Reverse pass that recomputes the forward activations first.
pub fn backward<F: FeatureRows + ?Sized>(
    blocks: &ComputationBlocks,
    features: &F,
    params: &ModelParams,
    grad_s: &Matrix,
    grad_t: &Matrix,
) -> Result<GradientSet> {
    let (_, tape) = forward_tape(blocks, features, params)?;
    backward_tape(blocks, &tape, params, grad_s, grad_t)
}

/// Embeds every node in minibatches over the unsampled L-hop neighborhood.
/// Row `i` of the result belongs to node `i`; results do not depend on
/// `batch_size`.
pub fn embed_all<A, F>(
    graph: &A,
    features: &F,
    params: &ModelParams,
    batch_size: usize,
) -> Result<DualEmbeddings>
where
    A: Adjacency + ?Sized,
    F: FeatureRows + ?Sized,
{
    embed_nodes(graph, features, params, batch_size, None)
}

/// Like [`embed_all`] but aggregates over sampled neighborhoods.
pub fn embed_all_sampled<A, F>(
    graph: &A,
    features: &F,
    params: &ModelParams,
    batch_size: usize,
    fanouts: &Fanouts,
    rng_seed: u64,
) -> Result<DualEmbeddings>
where
    A: Adjacency + ?Sized,
    F: FeatureRows + ?Sized,
{
    embed_nodes(graph, features, params, batch_size, Some((fanouts, rng_seed)))
}

fn embed_nodes<A, F>(
    graph: &A,
    features: &F,
    params: &ModelParams,
    batch_size: usize,
    sampling: Option<(&Fanouts, u64)>,
) -> Result<DualEmbeddings>
where
    A: Adjacency + ?Sized,
    F: FeatureRows + ?Sized,
{
    let n = graph.num_nodes();
    let d = params.d_h();
    let batch_size = batch_size.max(1);
    let mut theta_s = Matrix::zeros(n, d);
    let mut theta_t = Matrix::zeros(n, d);
    let ids: Vec<NodeId> = (0..n as NodeId).collect();
    for chunk in ids.chunks(batch_size) {
        let blocks = match sampling {
            None => full_blocks(graph, chunk, params.layers()),
            Some((fanouts, seed)) => sample_blocks(graph, chunk, fanouts, seed),
        };
        let emb = forward(&blocks, features, params)?;
        for (i, &v) in chunk.iter().enumerate() {
            theta_s.row_mut(v as usize).copy_from_slice(emb.theta_s.row(i));
            theta_t.row_mut(v as usize).copy_from_slice(emb.theta_t.row(i));
        }
    }
    DualEmbeddings::new(ids, theta_s, theta_t)
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"ASGMODEL";
pub const CHECKPOINT_VERSION: u32 = 1;

pub(crate) fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Checkpoint(format!("truncated payload: {e}")))?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// Shape fields of a checkpoint header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub layers: u32,
    pub d_in: u32,
    pub d_h: u32,
}

pub(crate) fn write_header<W: Write>(w: &mut W, magic: &[u8; 8], h: CheckpointHeader) -> Result<()> {
    w.write_all(magic)?;
    write_u32(w, CHECKPOINT_VERSION)?;
    write_u32(w, h.layers)?;
    write_u32(w, h.d_in)?;
    write_u32(w, h.d_h)
}

pub(crate) fn read_header<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<CheckpointHeader> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got)
        .map_err(|e| Error::Checkpoint(format!("truncated header: {e}")))?;
    if &got != magic {
        return Err(Error::Checkpoint(format!(
            "bad magic bytes {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, this build reads version {CHECKPOINT_VERSION}"
        )));
    }
    let h = CheckpointHeader {
        layers: read_u32(r)?,
        d_in: read_u32(r)?,
        d_h: read_u32(r)?,
    };
    if h.layers == 0 || h.d_in == 0 || h.d_h == 0 {
        return Err(Error::Checkpoint(format!("degenerate shape {h:?}")));
    }
    Ok(h)
}

impl ModelParams {
    pub fn header(&self) -> CheckpointHeader {
        CheckpointHeader {
            layers: self.layers() as u32,
            d_in: self.d_in() as u32,
            d_h: self.d_h() as u32,
        }
    }

    pub(crate) fn write_weights<W: Write>(&self, w: &mut W) -> Result<()> {
        for m in &self.weights {
            write_f64s(w, m.as_slice())?;
        }
        Ok(())
    }

    pub(crate) fn read_weights<R: Read>(r: &mut R, h: CheckpointHeader) -> Result<Self> {
        let (layers, d_in, d_h) = (h.layers as usize, h.d_in as usize, h.d_h as usize);
        let weights = (0..layers)
            .map(|l| {
                let rows = if l == 0 { d_in } else { d_h };
                Matrix::from_vec(rows, d_h, read_f64s(r, rows * d_h)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights)
    }

    /// Binary checkpoint: magic, version, L, d_in, d_h (little-endian u32),
    /// then each `W^l` row-major as little-endian f64.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, CHECKPOINT_MAGIC, self.header())?;
        self.write_weights(&mut w)
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let h = read_header(&mut r, CHECKPOINT_MAGIC)?;
        let params = Self::read_weights(&mut r, h)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after weights".into()));
        }
        Ok(params)
    }
}

/// Writes `<n>\t<d>` then `<key>\tS:<floats>\tT:<floats>` per node in id order.
pub fn write_embeddings<W: Write>(mut w: W, keys: &KeyMap, emb: &DualEmbeddings) -> Result<()> {
    writeln!(w, "{}\t{}", emb.len(), emb.dim())?;
    for (row, &id) in emb.ids().iter().enumerate() {
        let key = keys
            .key(id)
            .ok_or_else(|| Error::Invalid(format!("no key for node {id}")))?;
        write!(w, "{key}\tS:")?;
        write_floats(&mut w, emb.theta_s.row(row))?;
        write!(w, "\tT:")?;
        write_floats(&mut w, emb.theta_t.row(row))?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_embeddings<R: BufRead>(reader: R, path: &str) -> Result<(KeyMap, DualEmbeddings)> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(Error::parse(path, 1, "missing header")),
    };
    let (n, d) = header
        .trim_end()
        .split_once('\t')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| Error::parse(path, 1, "header must be <num_nodes>\\t<d_h>"))?;
    let mut keys = KeyMap::new();
    let mut s = Vec::with_capacity(n * d);
    let mut t = Vec::with_capacity(n * d);
    let parse_part = |part: &str, prefix: &str, line: usize, out: &mut Vec<f64>| -> Result<()> {
        let body = part
            .strip_prefix(prefix)
            .ok_or_else(|| Error::parse(path, line, format!("expected {prefix} field")))?;
        let before = out.len();
        for tok in body.split(',') {
            out.push(
                tok.parse()
                    .map_err(|_| Error::parse(path, line, format!("bad float {tok:?}")))?,
            );
        }
        if out.len() - before != d {
            return Err(Error::parse(path, line, format!("expected {d} values")));
        }
        Ok(())
    };
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line_no, "expected <key>\\tS:..\\tT:.."));
        }
        keys.insert_new(fields[0])
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        parse_part(fields[1], "S:", line_no, &mut s)?;
        parse_part(fields[2], "T:", line_no, &mut t)?;
    }
    if keys.len() != n {
        return Err(Error::parse(path, 1, format!("header declares {n} rows, found {}", keys.len())));
    }
    let ids = (0..n as NodeId).collect();
    let emb = DualEmbeddings::new(ids, Matrix::from_vec(n, d, s)?, Matrix::from_vec(n, d, t)?)?;
    Ok((keys, emb))
}
