use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::median;
use super::{GroupDistances, MetricsError};
use crate::model::ModelId;

/// Texture/structure regime of one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GapLabel {
    /// Texture statistics match (AdaIN at or below reference) but structure does not
    /// (DINOv2 above reference).
    CompositionalGap,
    /// Structure matches (DINOv2 at or below reference) but texture deviates
    /// (AdaIN above reference).
    StructuralAlignment,
    Mixed,
}

/// How reference levels for the gap classifier are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapPolicy {
    /// Corpus median of the per-group mean original-to-pastiche distance.
    #[default]
    Median,
    Absolute { dino_ref: f64, adain_ref: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReferences {
    pub dino_ref: f64,
    pub adain_ref: f64,
}

fn mean_for(group: &BTreeMap<ModelId, GroupDistances>, model: ModelId, id: &str) -> Result<f64, MetricsError> {
    group
        .get(&model)
        .map(GroupDistances::mean_to_original)
        .ok_or_else(|| MetricsError::MissingModel { group: id.to_string(), model })
}

/// Labels one group from its DINOv2 and AdaIN distances. Values equal to
/// their reference count as "low"; both low or both high is `Mixed`.
pub fn classify_gap(
    group: &BTreeMap<ModelId, GroupDistances>,
    refs: &GapReferences,
) -> Result<GapLabel, MetricsError> {
    let id = group.values().next().map(|g| g.group_id.as_str()).unwrap_or("<empty>");
    let dino = mean_for(group, ModelId::Dinov2, id)?;
    let adain = mean_for(group, ModelId::AdainStyle, id)?;
    let dino_high = dino > refs.dino_ref;
    let adain_high = adain > refs.adain_ref;
    Ok(match (dino_high, adain_high) {
        (true, false) => GapLabel::CompositionalGap,
        (false, true) => GapLabel::StructuralAlignment,
        _ => GapLabel::Mixed,
    })
}

/// Turns a policy into concrete reference levels for `distances`.
pub fn resolve_references(policy: GapPolicy, distances: &[GroupDistances]) -> Result<GapReferences, MetricsError> {
    match policy {
        GapPolicy::Absolute { dino_ref, adain_ref } => Ok(GapReferences { dino_ref, adain_ref }),
        GapPolicy::Median => {
            let med = |model: ModelId| {
                let means: Vec<f64> =
                    distances.iter().filter(|g| g.model_id == model).map(GroupDistances::mean_to_original).collect();
                median(&means).ok_or(MetricsError::MissingModel { group: "<corpus>".into(), model })
            };
            Ok(GapReferences { dino_ref: med(ModelId::Dinov2)?, adain_ref: med(ModelId::AdainStyle)? })
        }
    }
}

/// Labels every group in `distances` (any order, any models).
pub fn classify_corpus(
    distances: &[GroupDistances],
    policy: GapPolicy,
) -> Result<(GapReferences, BTreeMap<String, GapLabel>), MetricsError> {
    let refs = resolve_references(policy, distances)?;
    let mut groups: BTreeMap<&str, BTreeMap<ModelId, GroupDistances>> = BTreeMap::new();
    for g in distances {
        groups.entry(g.group_id.as_str()).or_default().insert(g.model_id, g.clone());
    }
    let labels = groups
        .into_iter()
        .map(|(id, g)| Ok((id.to_string(), classify_gap(&g, &refs)?)))
        .collect::<Result<_, MetricsError>>()?;
    Ok((refs, labels))
}
