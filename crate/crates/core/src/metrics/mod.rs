//! Distance and agreement statistics over per-model embeddings.

mod correlation;
mod distance;
mod gap;
mod grades;
mod stats;
mod summary;

pub use correlation::{correlation_matrix, correlation_series, pearson, CorrelationMatrix, KeyedSeries};
pub use distance::{cosine_distance, group_distances, DistanceTriplet, GroupDistances};
pub use gap::{classify_corpus, classify_gap, resolve_references, GapLabel, GapPolicy, GapReferences};
pub use grades::{grade_alignment, grade_to_distance, GradeAlignment, ModelGap};
pub use stats::{mean, median, population_variance, CompensatedSum};
pub use summary::{model_summary, summarize_models, ModelSummary, VariancePool};

use crate::model::ModelId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("cosine distance undefined for a zero vector")]
    ZeroVector,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("embeddings from different models: {0} and {1}")]
    ModelMismatch(ModelId, ModelId),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("series is constant; correlation undefined")]
    ConstantSeries,
    #[error("correlation series not aligned: {0}")]
    Alignment(String),
    #[error("grade {0} outside [1, 10]")]
    Range(f64),
    #[error("group `{group}` has no distances for {model}")]
    MissingModel { group: String, model: ModelId },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
