//! Embedding extraction: inference backends, AdaIN statistic pooling and the
//! on-disk embedding cache.

mod adain;
mod cache;
mod mock;
#[cfg(feature = "onnx")]
mod onnx;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::PreprocessedTensor;
use crate::model::{ModelId, ModelSpec, ADAIN_LAYERS};

pub use adain::{adain_pool, Activation};
pub use cache::{decode_record, encode_record, EmbeddingStore, RECORD_MAGIC};
pub use mock::{mock_backend, MockBackend};
#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;

#[derive(Debug, thiserror::Error)]
pub enum ExtractionError {
    #[error("{model}: cannot load graph {path}: {reason}")]
    GraphLoad { model: ModelId, path: PathBuf, reason: String },
    #[error("{model}: inference failed: {reason}")]
    Inference { model: ModelId, reason: String },
    #[error("{model}: graph output `{name}` missing")]
    OutputMissing { model: ModelId, name: String },
    #[error("{model}: embedding has {actual} entries, expected {expected}")]
    DimensionMismatch { model: ModelId, expected: usize, actual: usize },
    #[error("{model}: embedding contains non-finite values")]
    NonFinite { model: ModelId },
    #[error("tensor prepared for {tensor} passed to {spec} spec")]
    ModelMismatch { tensor: ModelId, spec: ModelId },
    #[error("activation shape error: {0}")]
    Shape(String),
    #[error("embedding store I/O on {path}: {source}")]
    StoreIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt embedding record {path}: {reason}")]
    CorruptRecord { path: PathBuf, reason: String },
    #[error("invalid image key `{0}`")]
    InvalidKey(String),
}

/// A dense tensor returned by a backend, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Runs an exported inference graph on one preprocessed image.
///
/// Implementations must be deterministic and safe to call from several
/// threads on distinct inputs.
pub trait InferenceBackend: Send + Sync {
    /// Feeds `input` (batch of one, `1 × 3 × R × R`) to the graph at
    /// `spec.graph_path` and returns every declared output by name.
    fn run(
        &self,
        spec: &ModelSpec,
        input: &PreprocessedTensor,
    ) -> Result<BTreeMap<String, OutputTensor>, ExtractionError>;
}

/// A model-tagged embedding for one image. Stored un-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub model_id: ModelId,
    pub image_key: String,
    pub vector: Vec<f32>,
}

impl Embedding {
    /// Checks the dimension and finiteness invariants.
    pub fn new(model_id: ModelId, image_key: impl Into<String>, vector: Vec<f32>) -> Result<Self, ExtractionError> {
        let expected = model_id.expected_dim();
        if vector.len() != expected {
            return Err(ExtractionError::DimensionMismatch { model: model_id, expected, actual: vector.len() });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(ExtractionError::NonFinite { model: model_id });
        }
        Ok(Embedding { model_id, image_key: image_key.into(), vector })
    }
}

/// Runs `backend` and turns its outputs into an [`Embedding`]: AdaIN
/// activations are pooled, every other model's single output is flattened.
pub fn extract_embedding(
    tensor: &PreprocessedTensor,
    spec: &ModelSpec,
    backend: &dyn InferenceBackend,
    image_key: &str,
) -> Result<Embedding, ExtractionError> {
    if tensor.model_id != spec.model_id {
        return Err(ExtractionError::ModelMismatch { tensor: tensor.model_id, spec: spec.model_id });
    }
    let model = spec.model_id;
    let mut outputs = backend.run(spec, tensor)?;
    let mut take = |name: &str| {
        outputs
            .remove(name)
            .ok_or_else(|| ExtractionError::OutputMissing { model, name: name.to_string() })
    };
    let vector = if model == ModelId::AdainStyle {
        let acts = ADAIN_LAYERS
            .iter()
            .map(|(name, _)| take(name).and_then(Activation::from_output))
            .collect::<Result<Vec<_>, _>>()?;
        adain_pool(&acts)?
    } else {
        let name = spec
            .output_names
            .first()
            .ok_or_else(|| ExtractionError::OutputMissing { model, name: "<none declared>".into() })?;
        take(name)?.data
    };
    Embedding::new(model, image_key, vector)
}
