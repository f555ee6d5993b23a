pub mod adapter_io;
pub mod anonymize;
pub mod cluster;
pub mod config;
pub mod corpus;
pub mod embed_store;
pub mod error;
pub mod eval_detect;
pub mod eval_text;
pub mod gen_eval;
pub mod interpret;
pub mod io;
pub mod pipeline;
pub mod plot;
pub mod reduce;
pub mod report;
pub mod scalar;
pub mod synthetic;
pub mod topic_eval;
pub mod topic_rep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for numeric work.
pub type Real = f64;
pub type EmbeddingMatrix32 = embed_store::EmbeddingMatrix<f32>;
pub type EmbeddingMatrix64 = embed_store::EmbeddingMatrix<f64>;
pub type TopicModel32 = topic_rep::TopicModel<f32>;
pub type TopicModel64 = topic_rep::TopicModel<f64>;
