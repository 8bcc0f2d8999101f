//! Minibatch training loop with early stopping and resumable state.

use std::borrow::Cow;
use std::io::{Read, Write};
use std::time::Instant;

use rand::seq::index;

use crate::config::{join_list, KvFile};
use crate::error::{Error, Result};
use crate::eval::{hitrate_mrr, rank_edges};
use crate::features::FeatureRows;
use crate::graph::{Adjacency, DirectedProductGraph, Direction, NodeId, RelationKind};
use crate::linalg::Matrix;
use crate::loss::{asymmetric_loss, loss_grad, LossBatch, LossConfig, NegativeForm};
use crate::model::{
    backward_tape, embed_all, forward_tape, read_f64s, read_header, read_u32, write_f64s,
    write_header, write_u32, ModelParams,
};
use crate::optim::{Adam, AdamConfig};
use crate::sampler::{sample_blocks, sample_negatives, Fanouts, NegativeConfig};
use crate::seed::{derive_seed, rng_for, TAG_BATCH, TAG_CV_CAP, TAG_NEGATIVES, TAG_SHUFFLE};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub layers: usize,
    pub d_h: usize,
    /// Neighbor caps, first entry for the layer nearest the input.
    pub fanouts: Vec<usize>,
    /// Negatives per co-purchase edge.
    pub negatives: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    /// Epochs without validation MRR@10 improvement before stopping.
    pub patience: usize,
    /// Max co-view pairs per batch.
    pub cv_cap: usize,
    pub negative_form: NegativeForm,
    pub term_weights: [f64; 6],
    /// Batch size for full-neighborhood embedding during validation.
    pub eval_batch_size: usize,
    /// Hide each batch's co-purchase edges from message passing while that
    /// batch is trained, so the model cannot read the edge it is scoring.
    pub exclude_batch_edges: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            batch_size: 1024,
            max_epochs: 30,
            layers: 3,
            d_h: 64,
            fanouts: vec![20, 10, 10],
            negatives: 5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            patience: 5,
            cv_cap: 1024,
            negative_form: NegativeForm::Shifted,
            term_weights: [1.0; 6],
            eval_batch_size: 1024,
            exclude_batch_edges: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be finite and >= 0, got {}", self.lr));
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("layers", self.layers),
            ("d_h", self.d_h),
            ("negatives", self.negatives),
            ("patience", self.patience),
            ("cv_cap", self.cv_cap),
            ("eval_batch_size", self.eval_batch_size),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.fanouts.len() != self.layers {
            return bad(format!(
                "fanouts has {} entries for {} layers",
                self.fanouts.len(),
                self.layers
            ));
        }
        Fanouts::new(self.fanouts.clone())?;
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("adam betas must lie in [0, 1)".into());
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad("eps must be > 0".into());
        }
        if self.term_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("term weights must be finite and >= 0".into());
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            negative_form: self.negative_form,
            term_weights: self.term_weights,
        }
    }

    /// Overrides defaults with the keys present in `kv`.
    pub fn from_kv(kv: &mut KvFile) -> Result<Self> {
        let mut c = Self::default();
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = kv.take(stringify!($field))? {
                    c.$field = v;
                }
            )*};
        }
        set!(lr, batch_size, max_epochs, layers, d_h, negatives, beta1, beta2, eps, seed,
             patience, cv_cap, negative_form, eval_batch_size, exclude_batch_edges);
        if let Some(f) = kv.take_list("fanouts")? {
            c.fanouts = f;
        }
        if let Some(w) = kv.take_list::<f64>("term_weights")? {
            c.term_weights = w
                .try_into()
                .map_err(|w: Vec<f64>| Error::Config(format!("term_weights needs 6 values, got {}", w.len())))?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("lr", format!("{:?}", self.lr));
        line("batch_size", self.batch_size.to_string());
        line("max_epochs", self.max_epochs.to_string());
        line("layers", self.layers.to_string());
        line("d_h", self.d_h.to_string());
        line("fanouts", join_list(&self.fanouts));
        line("negatives", self.negatives.to_string());
        line("beta1", format!("{:?}", self.beta1));
        line("beta2", format!("{:?}", self.beta2));
        line("eps", format!("{:?}", self.eps));
        line("seed", self.seed.to_string());
        line("patience", self.patience.to_string());
        line("cv_cap", self.cv_cap.to_string());
        line("negative_form", self.negative_form.to_string());
        line(
            "term_weights",
            self.term_weights
                .iter()
                .map(|w| format!("{w:?}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        line("eval_batch_size", self.eval_batch_size.to_string());
        line("exclude_batch_edges", self.exclude_batch_edges.to_string());
        s
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub epoch: usize,
    pub batch: usize,
    pub total: f64,
    pub per_term: [f64; 6],
    pub wall_ms: u128,
}

impl LogRow {
    pub const HEADER: &'static str = "epoch\tbatch\ttotal\tt1\tt2\tt3\tt4\tt5\tt6\twall_ms";

    pub fn to_tsv(&self) -> String {
        let mut s = format!("{}\t{}\t{:.6}", self.epoch, self.batch, self.total);
        for t in self.per_term {
            s.push_str(&format!("\t{t:.6}"));
        }
        s.push_str(&format!("\t{}", self.wall_ms));
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Validation MRR@10, when validation edges exist.
    pub val_mrr: Option<f64>,
    pub improved: bool,
}

/// Everything needed to continue training exactly where it stopped. All
/// random streams are derived from `(seed, epoch, batch)`, so the epoch
/// counter is the whole RNG state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: ModelParams,
    pub adam: Adam,
    /// Completed epochs.
    pub epoch: usize,
    pub seed: u64,
    pub best_metric: Option<f64>,
    pub best_params: ModelParams,
    pub epochs_since_best: usize,
    pub stopped: bool,
}

const STATE_MAGIC: &[u8; 8] = b"ASGSTATE";

fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated state: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

fn read_matrices<R: Read>(r: &mut R, like: &ModelParams) -> Result<Vec<Matrix>> {
    like.weights()
        .iter()
        .map(|m| Matrix::from_vec(m.rows(), m.cols(), read_f64s(r, m.rows() * m.cols())?))
        .collect()
}

impl TrainState {
    pub fn new(d_in: usize, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let params = ModelParams::init(d_in, cfg.d_h, cfg.layers, cfg.seed);
        let adam = Adam::new(cfg.adam(), params.weights());
        Ok(Self {
            best_params: params.clone(),
            params,
            adam,
            epoch: 0,
            seed: cfg.seed,
            best_metric: None,
            epochs_since_best: 0,
            stopped: false,
        })
    }

    /// Binary layout: magic, version, L, d_in, d_h, then epoch, seed, Adam
    /// step, epochs since best (u64 LE), stopped flag (u32), best metric
    /// (f64, NaN when unset), then params, m, v and best params as f64 LE.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, STATE_MAGIC, self.params.header())?;
        write_u64(&mut w, self.epoch as u64)?;
        write_u64(&mut w, self.seed)?;
        write_u64(&mut w, self.adam.step)?;
        write_u64(&mut w, self.epochs_since_best as u64)?;
        write_u32(&mut w, self.stopped as u32)?;
        write_f64s(&mut w, &[self.best_metric.unwrap_or(f64::NAN)])?;
        for set in [self.params.weights(), &self.adam.m, &self.adam.v, self.best_params.weights()] {
            for m in set {
                write_f64s(&mut w, m.as_slice())?;
            }
        }
        Ok(())
    }

    /// Reads a state written by [`TrainState::write`] and checks it against
    /// `cfg` (shape, seed). Adam hyperparameters come from `cfg`.
    pub fn read<R: Read>(mut r: R, cfg: &TrainConfig) -> Result<Self> {
        let h = read_header(&mut r, STATE_MAGIC)?;
        if h.layers as usize != cfg.layers || h.d_h as usize != cfg.d_h {
            return Err(Error::Checkpoint(format!(
                "state has layers={} d_h={}, config asks for layers={} d_h={}",
                h.layers, h.d_h, cfg.layers, cfg.d_h
            )));
        }
        let epoch = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        if seed != cfg.seed {
            return Err(Error::Checkpoint(format!(
                "state was trained with seed {seed}, config has {}",
                cfg.seed
            )));
        }
        let step = read_u64(&mut r)?;
        let epochs_since_best = read_u64(&mut r)? as usize;
        let stopped = read_u32(&mut r)? != 0;
        let best = read_f64s(&mut r, 1)?[0];
        let params = ModelParams::read_weights(&mut r, h)?;
        let m = read_matrices(&mut r, &params)?;
        let v = read_matrices(&mut r, &params)?;
        let best_params = ModelParams::read_weights(&mut r, h)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after state".into()));
        }
        Ok(Self {
            params,
            adam: Adam {
                cfg: cfg.adam(),
                step,
                m,
                v,
            },
            epoch,
            seed,
            best_metric: (!best.is_nan()).then_some(best),
            best_params,
            epochs_since_best,
            stopped,
        })
    }
}

/// The training graph with a set of co-purchase edges hidden.
struct HiddenEdges<'a> {
    base: &'a DirectedProductGraph,
    /// Sorted `(u, v)` and sorted reversed `(v, u)`.
    out: Vec<(NodeId, NodeId)>,
    rev: Vec<(NodeId, NodeId)>,
}

impl<'a> HiddenEdges<'a> {
    fn new(base: &'a DirectedProductGraph, edges: &[(NodeId, NodeId)]) -> Self {
        let mut out = edges.to_vec();
        out.sort_unstable();
        let mut rev: Vec<_> = edges.iter().map(|&(u, v)| (v, u)).collect();
        rev.sort_unstable();
        Self { base, out, rev }
    }

    fn hidden_of(list: &[(NodeId, NodeId)], u: NodeId) -> &[(NodeId, NodeId)] {
        let lo = list.partition_point(|e| e.0 < u);
        let hi = list.partition_point(|e| e.0 <= u);
        &list[lo..hi]
    }
}

impl Adjacency for HiddenEdges<'_> {
    fn num_nodes(&self) -> usize {
        self.base.num_nodes()
    }

    fn neighbors_of(&self, u: NodeId, kind: RelationKind, dir: Direction) -> Cow<'_, [NodeId]> {
        let all = self.base.neighbors_of(u, kind, dir);
        if kind != RelationKind::CoPurchase {
            return all;
        }
        let list = if dir == Direction::Out { &self.out } else { &self.rev };
        let hidden = Self::hidden_of(list, u);
        if hidden.is_empty() {
            return all;
        }
        Cow::Owned(
            all.iter()
                .copied()
                .filter(|v| hidden.binary_search(&(u, *v)).is_err())
                .collect(),
        )
    }
}

/// Drives training over a fixed training graph.
pub struct Trainer<'a, F: FeatureRows + ?Sized> {
    graph: &'a DirectedProductGraph,
    features: &'a F,
    val_edges: &'a [(NodeId, NodeId)],
    cfg: TrainConfig,
    fanouts: Fanouts,
    edges: Vec<(NodeId, NodeId)>,
}

impl<'a, F: FeatureRows + ?Sized> Trainer<'a, F> {
    /// `graph` is the training graph; `val_edges` drive early stopping and
    /// may be empty (then the latest parameters are kept as best).
    pub fn new(
        graph: &'a DirectedProductGraph,
        features: &'a F,
        val_edges: &'a [(NodeId, NodeId)],
        cfg: TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if features.num_rows() != graph.num_nodes() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                features.num_rows(),
                graph.num_nodes()
            )));
        }
        let edges = graph.cp_edges();
        if edges.is_empty() {
            return Err(Error::Invalid("training split has no co-purchase edges".into()));
        }
        Ok(Self {
            fanouts: Fanouts::new(cfg.fanouts.clone())?,
            graph,
            features,
            val_edges,
            cfg,
            edges,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn init_state(&self) -> Result<TrainState> {
        TrainState::new(self.features.dim(), &self.cfg)
    }

    fn check_state(&self, state: &TrainState) -> Result<()> {
        if state.params.d_in() != self.features.dim()
            || state.params.d_h() != self.cfg.d_h
            || state.params.layers() != self.cfg.layers
        {
            return Err(Error::Shape(format!(
                "state shape (L={}, d_in={}, d_h={}) does not match features/config (L={}, d_in={}, d_h={})",
                state.params.layers(),
                state.params.d_in(),
                state.params.d_h(),
                self.cfg.layers,
                self.features.dim(),
                self.cfg.d_h
            )));
        }
        Ok(())
    }

    /// The loss batch for the `b`-th slice of a shuffled epoch.
    pub fn build_batch(&self, epoch: usize, b: usize, edges: &[(NodeId, NodeId)]) -> Result<LossBatch> {
        let g = self.graph;
        let mut nodes: Vec<NodeId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut cv: Vec<(NodeId, NodeId)> = nodes
            .iter()
            .flat_map(|&u| g.cv(u).iter().map(move |&v| (u.min(v), u.max(v))))
            .collect();
        cv.sort_unstable();
        cv.dedup();
        if cv.len() > self.cfg.cv_cap {
            let mut rng = rng_for(self.cfg.seed, &[TAG_CV_CAP, epoch as u64, b as u64]);
            let mut keep = index::sample(&mut rng, cv.len(), self.cfg.cv_cap).into_vec();
            keep.sort_unstable();
            cv = keep.into_iter().map(|i| cv[i]).collect();
        }
        let negatives = sample_negatives(
            g,
            edges,
            NegativeConfig {
                per_positive: self.cfg.negatives,
                exclude_positives: true,
            },
            derive_seed(self.cfg.seed, &[TAG_NEGATIVES, epoch as u64, b as u64]),
        )?;
        Ok(LossBatch {
            cp_edges: edges.to_vec(),
            one_way: edges.iter().map(|&(u, v)| g.is_one_way(u, v)).collect(),
            cv_edges: cv,
            negatives,
        })
    }

    /// Training edges in the order epoch `epoch` visits them.
    pub fn epoch_order(&self, epoch: usize) -> Vec<(NodeId, NodeId)> {
        let mut rng = rng_for(self.cfg.seed, &[TAG_SHUFFLE, epoch as u64]);
        let mut order = self.edges.clone();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        order
    }

    /// Loss and weight gradients of one batch at the current parameters.
    pub fn batch_gradients(
        &self,
        params: &ModelParams,
        epoch: usize,
        b: usize,
        batch: &LossBatch,
    ) -> Result<(crate::loss::LossValue, Vec<Matrix>)> {
        let seeds = batch.touched_nodes();
        let block_seed = derive_seed(self.cfg.seed, &[TAG_BATCH, epoch as u64, b as u64]);
        let blocks = if self.cfg.exclude_batch_edges {
            let view = HiddenEdges::new(self.graph, &batch.cp_edges);
            sample_blocks(&view, &seeds, &self.fanouts, block_seed)
        } else {
            sample_blocks(self.graph, &seeds, &self.fanouts, block_seed)
        };
        let at_batch = |e: Error| match e {
            Error::NonFinite(m) => Error::NonFinite(format!("{m} at epoch {} batch {b}", epoch + 1)),
            other => other,
        };
        let (emb, tape) = forward_tape(&blocks, self.features, params).map_err(at_batch)?;
        let loss_cfg = self.cfg.loss();
        let value = asymmetric_loss(&emb, batch, &loss_cfg).map_err(at_batch)?;
        if !value.total.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss {} at epoch {} batch {} (terms {:?})",
                value.total,
                epoch + 1,
                b,
                value.per_term
            )));
        }
        let (gs, gt) = loss_grad(&emb, batch, &loss_cfg)?;
        let grads = backward_tape(&blocks, &tape, params, &gs, &gt).map_err(at_batch)?;
        if grads.weights.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "weight gradient at epoch {} batch {}",
                epoch + 1,
                b
            )));
        }
        Ok((value, grads.weights))
    }

    /// Validation MRR@10 at `params`, or `None` without validation edges.
    pub fn validate(&self, params: &ModelParams) -> Result<Option<f64>> {
        if self.val_edges.is_empty() {
            return Ok(None);
        }
        let emb = embed_all(self.graph, self.features, params, self.cfg.eval_batch_size)?;
        let ranks = rank_edges(&emb, self.val_edges, Some(self.graph), None);
        Ok(Some(hitrate_mrr(&ranks, &[10])[0].mrr))
    }

    /// Runs one epoch, calling `log` after every batch.
    pub fn run_epoch(
        &self,
        state: &mut TrainState,
        log: &mut dyn FnMut(&LogRow),
    ) -> Result<EpochSummary> {
        self.check_state(state)?;
        let epoch = state.epoch;
        let order = self.epoch_order(epoch);
        let mut loss_sum = 0.0;
        let mut edge_count = 0usize;
        for (b, chunk) in order.chunks(self.cfg.batch_size).enumerate() {
            let started = Instant::now();
            let batch = self.build_batch(epoch, b, chunk)?;
            let (value, grads) = self.batch_gradients(&state.params, epoch, b, &batch)?;
            state.adam.update(state.params.weights_mut(), &grads);
            loss_sum += value.total;
            edge_count += chunk.len();
            log(&LogRow {
                epoch: epoch + 1,
                batch: b,
                total: value.total,
                per_term: value.per_term,
                wall_ms: started.elapsed().as_millis(),
            });
        }
        if state.params.weights().iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite(format!("weights after epoch {}", epoch + 1)));
        }
        state.epoch += 1;
        let val = self.validate(&state.params)?;
        let improved = match (val, state.best_metric) {
            (None, _) => true,
            (Some(_), None) => true,
            (Some(m), Some(best)) => m > best,
        };
        if improved {
            state.best_metric = val;
            state.best_params = state.params.clone();
            state.epochs_since_best = 0;
        } else {
            state.epochs_since_best += 1;
            if state.epochs_since_best >= self.cfg.patience {
                log::info!(
                    "early stop after epoch {}: no validation improvement for {} epochs",
                    state.epoch,
                    state.epochs_since_best
                );
                state.stopped = true;
            }
        }
        if state.epoch >= self.cfg.max_epochs {
            state.stopped = true;
        }
        let summary = EpochSummary {
            epoch: state.epoch,
            mean_loss: loss_sum / edge_count as f64,
            val_mrr: val,
            improved,
        };
        log::info!(
            "epoch {}: mean loss per edge {:.5}, val MRR@10 {}",
            summary.epoch,
            summary.mean_loss,
            val.map_or("n/a".to_string(), |m| format!("{m:.4}"))
        );
        Ok(summary)
    }

    /// Trains until `state.stopped` or `until_epoch` completed epochs.
    pub fn run_until(
        &self,
        state: &mut TrainState,
        until_epoch: usize,
        log: &mut dyn FnMut(&LogRow),
    ) -> Result<Vec<EpochSummary>> {
        let mut out = Vec::new();
        while !state.stopped && state.epoch < until_epoch.min(self.cfg.max_epochs) {
            out.push(self.run_epoch(state, log)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the best validation MRR@10.
    pub params: ModelParams,
    pub state: TrainState,
    pub log: Vec<LogRow>,
    pub epochs: Vec<EpochSummary>,
}

/// Trains from scratch on `graph` until `cfg.max_epochs` or early stop.
pub fn train<F: FeatureRows + ?Sized>(
    graph: &DirectedProductGraph,
    features: &F,
    val_edges: &[(NodeId, NodeId)],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let trainer = Trainer::new(graph, features, val_edges, cfg.clone())?;
    let mut state = trainer.init_state()?;
    let mut log = Vec::new();
    let epochs = trainer.run_until(&mut state, cfg.max_epochs, &mut |r| log.push(r.clone()))?;
    Ok(TrainOutcome {
        params: state.best_params.clone(),
        state,
        log,
        epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;

    fn toy() -> (DirectedProductGraph, FeatureMatrix) {
        let g = DirectedProductGraph::build(4, &[(0, 1), (2, 3), (0, 3)], &[(1, 2)]).unwrap();
        let f = FeatureMatrix::new(
            Matrix::from_rows(&[
                vec![1.0, 0.1, 0.0],
                vec![0.0, 1.0, 0.2],
                vec![0.3, 0.0, 1.0],
                vec![0.5, 0.5, 0.5],
            ])
            .unwrap(),
        )
        .unwrap();
        (g, f)
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            lr: 0.01,
            batch_size: 2,
            max_epochs: 3,
            layers: 2,
            d_h: 4,
            fanouts: vec![3, 3],
            negatives: 2,
            seed: 11,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_roundtrips_through_kv() {
        let cfg = small_cfg();
        let mut kv = KvFile::parse(&cfg.to_kv(), "cfg").unwrap();
        let back = TrainConfig::from_kv(&mut kv).unwrap();
        kv.finish().unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_invariants() {
        let c = TrainConfig {
            fanouts: vec![5, 5],
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn empty_training_split_rejected() {
        let g = DirectedProductGraph::build(2, &[], &[(0, 1)]).unwrap();
        let f = FeatureMatrix::new(Matrix::identity(2)).unwrap();
        assert!(Trainer::new(&g, &f, &[], small_cfg()).is_err());
    }

    #[test]
    fn state_roundtrip() {
        let (g, f) = toy();
        let cfg = small_cfg();
        let t = Trainer::new(&g, &f, &[(0, 1)], cfg.clone()).unwrap();
        let mut s = t.init_state().unwrap();
        t.run_epoch(&mut s, &mut |_| {}).unwrap();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        assert_eq!(TrainState::read(&buf[..], &cfg).unwrap(), s);
    }

    #[test]
    fn hidden_edges_view() {
        let g = DirectedProductGraph::build(3, &[(0, 1), (0, 2), (1, 0)], &[(1, 2)]).unwrap();
        let v = HiddenEdges::new(&g, &[(0, 1)]);
        assert_eq!(&*v.neighbors_of(0, RelationKind::CoPurchase, Direction::Out), &[2]);
        assert_eq!(&*v.neighbors_of(1, RelationKind::CoPurchase, Direction::In), &[] as &[NodeId]);
        assert_eq!(&*v.neighbors_of(1, RelationKind::CoPurchase, Direction::Out), &[0]);
        assert_eq!(&*v.neighbors_of(1, RelationKind::CoView, Direction::Out), &[2]);
    }

    #[test]
    fn log_row_has_ten_columns() {
        let r = LogRow {
            epoch: 1,
            batch: 0,
            total: 1.0,
            per_term: [0.0; 6],
            wall_ms: 3,
        };
        assert_eq!(r.to_tsv().split('\t').count(), 10);
        assert_eq!(LogRow::HEADER.split('\t').count(), 10);
    }
}
