//! Style dashboard: compares original artworks with their pastiches along five
//! complementary embedding dimensions (texture statistics, artistic category,
//! semantics, structure and perceptual features) and reports distances,
//! discrimination, consistency, model agreement and gap classifications.

pub mod config;
pub mod corpus;
pub mod extraction;
pub mod metrics;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod report;

pub use model::{ModelId, ModelSpec};
pub use par::Execution;
