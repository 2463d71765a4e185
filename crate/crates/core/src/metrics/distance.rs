use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::extraction::Embedding;
use crate::model::ModelId;

/// `1 − a·b / (‖a‖‖b‖)`, clamped to `[0, 2]`. Accumulates in `f64`.
pub fn cosine_distance<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y): (f64, f64) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(MetricsError::ZeroVector);
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): for a == b this is exactly
    // dot, so self-distance is exactly zero.
    let cos = dot / (na * nb).sqrt();
    if !cos.is_finite() {
        return Err(MetricsError::NonFinite("cosine similarity"));
    }
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

/// The three distances of a classic one-original, two-pastiche group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriplet {
    pub group_id: String,
    pub model_id: ModelId,
    pub d_o_p1: f64,
    pub d_o_p2: f64,
    pub d_p1_p2: f64,
}

/// All cosine distances of one group under one model: original to each
/// pastiche, and between every pastiche pair `(i, j)`, `i < j`, in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistances {
    pub group_id: String,
    pub model_id: ModelId,
    pub to_original: Vec<f64>,
    pub between_pastiches: Vec<f64>,
}

impl GroupDistances {
    pub fn pastiche_count(&self) -> usize {
        self.to_original.len()
    }

    pub fn d_o_p1(&self) -> Option<f64> {
        self.to_original.first().copied()
    }

    pub fn d_o_p2(&self) -> Option<f64> {
        self.to_original.get(1).copied()
    }

    pub fn d_p1_p2(&self) -> Option<f64> {
        self.between_pastiches.first().copied()
    }

    /// Mean original-to-pastiche distance.
    pub fn mean_to_original(&self) -> f64 {
        super::mean(&self.to_original).unwrap_or(f64::NAN)
    }

    pub fn triplet(&self) -> Option<DistanceTriplet> {
        Some(DistanceTriplet {
            group_id: self.group_id.clone(),
            model_id: self.model_id,
            d_o_p1: self.d_o_p1()?,
            d_o_p2: self.d_o_p2()?,
            d_p1_p2: self.d_p1_p2()?,
        })
    }
}

impl From<DistanceTriplet> for GroupDistances {
    fn from(t: DistanceTriplet) -> Self {
        GroupDistances {
            group_id: t.group_id,
            model_id: t.model_id,
            to_original: vec![t.d_o_p1, t.d_o_p2],
            between_pastiches: vec![t.d_p1_p2],
        }
    }
}

/// Distances of one group. All embeddings must come from the same model.
pub fn group_distances(
    group_id: &str,
    original: &Embedding,
    pastiches: &[&Embedding],
) -> Result<GroupDistances, MetricsError> {
    if pastiches.is_empty() {
        return Err(MetricsError::EmptyInput("group without pastiches"));
    }
    let model = original.model_id;
    if let Some(p) = pastiches.iter().find(|p| p.model_id != model) {
        return Err(MetricsError::ModelMismatch(model, p.model_id));
    }
    let to_original = pastiches
        .iter()
        .map(|p| cosine_distance(&original.vector, &p.vector))
        .collect::<Result<_, _>>()?;
    let mut between_pastiches = Vec::new();
    for i in 0..pastiches.len() {
        for j in i + 1..pastiches.len() {
            between_pastiches.push(cosine_distance(&pastiches[i].vector, &pastiches[j].vector)?);
        }
    }
    Ok(GroupDistances { group_id: group_id.to_string(), model_id: model, to_original, between_pastiches })
}
