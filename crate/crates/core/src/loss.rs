//! Six-term asymmetric loss over dual embeddings and its analytic gradient.
//!
//! With `rel(u, v) = θ^s_u · θ^t_v` the loss is `-(T1 + ... + T6)`:
//!
//! | term | edges            | summand                         |
//! |------|------------------|---------------------------------|
//! | T1   | co-purchase      | `log σ(θ^s_u · θ^t_v)`          |
//! | T2   | negatives `z`    | `log σ(1 - θ^s_u · θ^t_z)`      |
//! | T3   | one-way cp       | `log σ(θ^s_u · θ^t_v)`          |
//! | T4   | one-way cp       | `log σ(1 - θ^s_v · θ^t_u)`      |
//! | T5   | co-view          | `log σ(θ^s_u · θ^s_v)`          |
//! | T6   | co-view          | `log σ(θ^t_u · θ^t_v)`          |
//!
//! A one-way edge contributes to both T1 and T3.

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::linalg::{self, Matrix};
use crate::model::DualEmbeddings;
use crate::sampler::NegativeBatch;

/// How the negative term penalizes `x = θ^s_u · θ^t_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeForm {
    /// `log σ(1 - x)`
    #[default]
    Shifted,
    /// `log σ(-x)`
    Conventional,
}

impl std::str::FromStr for NegativeForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "shifted" => Ok(NegativeForm::Shifted),
            "conventional" => Ok(NegativeForm::Conventional),
            other => Err(format!("unknown negative form {other:?}")),
        }
    }
}

impl std::fmt::Display for NegativeForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NegativeForm::Shifted => "shifted",
            NegativeForm::Conventional => "conventional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub negative_form: NegativeForm,
    pub term_weights: [f64; 6],
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            negative_form: NegativeForm::Shifted,
            term_weights: [1.0; 6],
        }
    }
}

/// Edges and negatives of one minibatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossBatch {
    pub cp_edges: Vec<(NodeId, NodeId)>,
    /// `one_way[i]` is true iff the reverse of `cp_edges[i]` is not a co-purchase edge.
    pub one_way: Vec<bool>,
    pub cv_edges: Vec<(NodeId, NodeId)>,
    pub negatives: NegativeBatch,
}

impl LossBatch {
    pub fn empty() -> Self {
        Self {
            cp_edges: Vec::new(),
            one_way: Vec::new(),
            cv_edges: Vec::new(),
            negatives: NegativeBatch {
                per_edge: Vec::new(),
            },
        }
    }

    /// Every node the loss reads, sorted and deduplicated.
    pub fn touched_nodes(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self
            .cp_edges
            .iter()
            .chain(&self.cv_edges)
            .flat_map(|&(u, v)| [u, v])
            .chain(self.negatives.per_edge.iter().flatten().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    fn validate(&self) -> Result<()> {
        if self.one_way.len() != self.cp_edges.len() {
            return Err(Error::Shape(format!(
                "{} one-way flags for {} co-purchase edges",
                self.one_way.len(),
                self.cp_edges.len()
            )));
        }
        if self.negatives.per_edge.len() != self.cp_edges.len() {
            return Err(Error::Shape(format!(
                "{} negative lists for {} co-purchase edges",
                self.negatives.per_edge.len(),
                self.cp_edges.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossValue {
    pub total: f64,
    /// Negated, weighted per-term values `-w_k T_k` (each ≥ 0).
    pub per_term: [f64; 6],
}

/// `log σ(x)`, stable for large |x|.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One scored pair inside the loss: `-weight * log σ(offset + sign * a·b)`.
#[derive(Clone, Copy)]
struct Pair {
    term: usize,
    a: (NodeId, Side),
    b: (NodeId, Side),
    offset: f64,
    sign: f64,
}

#[derive(Clone, Copy)]
enum Side {
    S,
    T,
}

fn pairs(batch: &LossBatch, cfg: &LossConfig) -> Vec<Pair> {
    let (neg_offset, neg_sign) = match cfg.negative_form {
        NegativeForm::Shifted => (1.0, -1.0),
        NegativeForm::Conventional => (0.0, -1.0),
    };
    let mut out = Vec::new();
    for (i, &(u, v)) in batch.cp_edges.iter().enumerate() {
        out.push(Pair { term: 0, a: (u, Side::S), b: (v, Side::T), offset: 0.0, sign: 1.0 });
        for &z in &batch.negatives.per_edge[i] {
            out.push(Pair { term: 1, a: (u, Side::S), b: (z, Side::T), offset: neg_offset, sign: neg_sign });
        }
        if batch.one_way[i] {
            out.push(Pair { term: 2, a: (u, Side::S), b: (v, Side::T), offset: 0.0, sign: 1.0 });
            out.push(Pair { term: 3, a: (v, Side::S), b: (u, Side::T), offset: 1.0, sign: -1.0 });
        }
    }
    for &(u, v) in &batch.cv_edges {
        out.push(Pair { term: 4, a: (u, Side::S), b: (v, Side::S), offset: 0.0, sign: 1.0 });
        out.push(Pair { term: 5, a: (u, Side::T), b: (v, Side::T), offset: 0.0, sign: 1.0 });
    }
    out
}

fn lookup(emb: &DualEmbeddings, (id, side): (NodeId, Side)) -> Result<(usize, &[f64])> {
    let row = emb
        .row_of(id)
        .ok_or_else(|| Error::Invalid(format!("no embedding for node {id} in this batch")))?;
    Ok(match side {
        Side::S => (row, emb.theta_s.row(row)),
        Side::T => (row, emb.theta_t.row(row)),
    })
}

pub fn asymmetric_loss(emb: &DualEmbeddings, batch: &LossBatch, cfg: &LossConfig) -> Result<LossValue> {
    batch.validate()?;
    let mut per_term = [0.0; 6];
    for p in pairs(batch, cfg) {
        let (_, a) = lookup(emb, p.a)?;
        let (_, b) = lookup(emb, p.b)?;
        let x = p.offset + p.sign * linalg::dot(a, b);
        per_term[p.term] -= log_sigmoid(x);
    }
    for (t, w) in per_term.iter_mut().zip(cfg.term_weights) {
        *t *= w;
    }
    Ok(LossValue {
        total: per_term.iter().sum(),
        per_term,
    })
}

/// Gradients of the total loss w.r.t. `emb.theta_s` and `emb.theta_t`
/// (same shapes, same row order).
pub fn loss_grad(emb: &DualEmbeddings, batch: &LossBatch, cfg: &LossConfig) -> Result<(Matrix, Matrix)> {
    batch.validate()?;
    let mut gs = Matrix::zeros(emb.len(), emb.dim());
    let mut gt = Matrix::zeros(emb.len(), emb.dim());
    for p in pairs(batch, cfg) {
        let (ra, a) = lookup(emb, p.a)?;
        let (rb, b) = lookup(emb, p.b)?;
        let x = p.offset + p.sign * linalg::dot(a, b);
        // d/dx[-log σ(x)] = σ(x) - 1, chained through x = offset + sign·(a·b).
        let coef = cfg.term_weights[p.term] * (sigmoid(x) - 1.0) * p.sign;
        let (a, b) = (a.to_vec(), b.to_vec());
        match p.a.1 {
            Side::S => linalg::axpy(coef, &b, gs.row_mut(ra)),
            Side::T => linalg::axpy(coef, &b, gt.row_mut(ra)),
        }
        match p.b.1 {
            Side::S => linalg::axpy(coef, &a, gs.row_mut(rb)),
            Side::T => linalg::axpy(coef, &a, gt.row_mut(rb)),
        }
    }
    Ok((gs, gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn emb(rows_s: &[Vec<f64>], rows_t: &[Vec<f64>]) -> DualEmbeddings {
        let ids = (0..rows_s.len() as NodeId).collect();
        DualEmbeddings::new(
            ids,
            Matrix::from_rows(rows_s).unwrap(),
            Matrix::from_rows(rows_t).unwrap(),
        )
        .unwrap()
    }

    fn neg(lists: Vec<Vec<NodeId>>) -> NegativeBatch {
        NegativeBatch { per_edge: lists }
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert_abs_diff_eq!(log_sigmoid(0.0), -std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(log_sigmoid(-800.0), -800.0, epsilon = 1e-9);
        assert!(log_sigmoid(800.0) <= 0.0 && log_sigmoid(800.0) > -1e-300);
        assert_abs_diff_eq!(sigmoid(-800.0), 0.0, epsilon = 1e-300);
    }

    #[test]
    fn one_way_edge_example() {
        // node 0 = u, 1 = v, 2 = z; rel(u,v) = 1/sqrt(2), rel(v,u) = 0, rel(u,z) = 0
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = emb(
            &[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
            &[vec![0.0, 0.0], vec![r, r], vec![0.0, 1.0]],
        );
        let batch = LossBatch {
            cp_edges: vec![(0, 1)],
            one_way: vec![true],
            cv_edges: vec![],
            negatives: neg(vec![vec![2]]),
        };
        let v = asymmetric_loss(&e, &batch, &LossConfig::default()).unwrap();
        // closed form: -log σ(x) = ln(1 + e^-x)
        let pos = (1.0 + (-r).exp()).ln();
        let one = (1.0 + (-1.0f64).exp()).ln();
        assert_abs_diff_eq!(v.per_term[0], pos, epsilon = 1e-12);
        assert_abs_diff_eq!(v.per_term[1], one, epsilon = 1e-12);
        assert_abs_diff_eq!(v.per_term[2], pos, epsilon = 1e-12);
        assert_abs_diff_eq!(v.per_term[3], one, epsilon = 1e-12);
        // hand-rounded reference values (0.4009 is 0.40083 rounded up)
        assert_abs_diff_eq!(v.per_term[0], 0.4009, epsilon = 1e-4);
        assert_abs_diff_eq!(v.total, 1.4284, epsilon = 3e-4);
    }

    #[test]
    fn reciprocal_edge_example() {
        let e = emb(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
        );
        let batch = LossBatch {
            cp_edges: vec![(0, 1)],
            one_way: vec![false],
            cv_edges: vec![],
            negatives: neg(vec![vec![2]]),
        };
        let v = asymmetric_loss(&e, &batch, &LossConfig::default()).unwrap();
        assert_abs_diff_eq!(v.per_term[0], std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(v.per_term[1], 0.3133, epsilon = 5e-5);
        assert_eq!(v.per_term[2], 0.0);
        assert_eq!(v.per_term[3], 0.0);
        assert_abs_diff_eq!(v.total, 1.0064, epsilon = 1e-4);
    }

    #[test]
    fn empty_batch() {
        let e = emb(&[vec![1.0]], &[vec![1.0]]);
        let v = asymmetric_loss(&e, &LossBatch::empty(), &LossConfig::default()).unwrap();
        assert_eq!(v, LossValue::default());
        let (gs, gt) = loss_grad(&e, &LossBatch::empty(), &LossConfig::default()).unwrap();
        assert_eq!(gs.max_abs() + gt.max_abs(), 0.0);
    }

    #[test]
    fn missing_embedding_is_an_error() {
        let e = emb(&[vec![1.0]], &[vec![1.0]]);
        let batch = LossBatch {
            cp_edges: vec![(0, 4)],
            one_way: vec![true],
            cv_edges: vec![],
            negatives: neg(vec![vec![]]),
        };
        assert!(asymmetric_loss(&e, &batch, &LossConfig::default()).is_err());
    }

    #[test]
    fn cv_gradients_mirror() {
        let e = emb(
            &[vec![0.6, 0.8], vec![1.0, 0.0]],
            &[vec![0.0, 1.0], vec![0.0, 1.0]],
        );
        let batch = LossBatch {
            cv_edges: vec![(0, 1)],
            ..LossBatch::empty()
        };
        let (gs, _) = loss_grad(&e, &batch, &LossConfig::default()).unwrap();
        let c = sigmoid(0.6) - 1.0;
        assert_abs_diff_eq!(gs.row(0)[0], c * 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.row(0)[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.row(1)[0], c * 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(gs.row(1)[1], c * 0.8, epsilon = 1e-15);
    }

    #[test]
    fn term_weights_scale_terms() {
        let e = emb(&[vec![1.0], vec![0.5]], &[vec![0.2], vec![0.7]]);
        let batch = LossBatch {
            cp_edges: vec![(0, 1)],
            one_way: vec![true],
            cv_edges: vec![(0, 1)],
            negatives: neg(vec![vec![0]]),
        };
        let base = asymmetric_loss(&e, &batch, &LossConfig::default()).unwrap();
        let cfg = LossConfig {
            term_weights: [2.0, 0.0, 1.0, 1.0, 0.5, 1.0],
            ..LossConfig::default()
        };
        let w = asymmetric_loss(&e, &batch, &cfg).unwrap();
        assert_abs_diff_eq!(w.per_term[0], 2.0 * base.per_term[0], epsilon = 1e-15);
        assert_eq!(w.per_term[1], 0.0);
        assert_abs_diff_eq!(w.per_term[4], 0.5 * base.per_term[4], epsilon = 1e-15);
    }
}
