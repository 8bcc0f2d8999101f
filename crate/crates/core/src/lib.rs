//! Dual-embedding graph neural network for directed related-product
//! recommendation.
//!
//! Every product gets a source embedding (the product as a query) and a
//! target embedding (the product as a recommendation); relatedness of `v`
//! to `q` is `θ^s_q · θ^t_v`, so it is asymmetric.

pub mod coldstart;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod optim;
pub mod par;
pub mod retrieval;
pub mod sampler;
pub mod seed;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureRows};
pub use graph::{DirectedProductGraph, KeyMap, NodeId, RelationKind};
pub use linalg::Matrix;
pub use model::{DualEmbeddings, ModelParams};
