use serde::{Deserialize, Serialize};

use super::{mean, MetricsError, ModelSummary};
use crate::corpus::HumanGrades;
use crate::model::ModelId;

/// Maps a 1-10 recognition grade onto the cosine-distance scale: `1 - grade / 10`.
pub fn grade_to_distance(grade: f64) -> Result<f64, MetricsError> {
    if !(1.0..=10.0).contains(&grade) {
        return Err(MetricsError::Range(grade));
    }
    Ok(1.0 - grade / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGap {
    pub model_id: ModelId,
    pub average: f64,
    /// `|mapped_distance − average|`
    pub gap: f64,
}

/// How the artists' mean recognition grade lines up with each model's average distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeAlignment {
    pub n_grades: usize,
    pub mean_style_recognition: f64,
    pub mean_aesthetic_value: f64,
    pub mapped_distance: f64,
    /// Closest model first; ties keep model order.
    pub ranking: Vec<ModelGap>,
}

impl GradeAlignment {
    pub fn closest(&self) -> &ModelGap {
        &self.ranking[0]
    }
}

pub fn grade_alignment(grades: &[HumanGrades], summaries: &[ModelSummary]) -> Result<GradeAlignment, MetricsError> {
    if grades.is_empty() {
        return Err(MetricsError::EmptyInput("no human grades"));
    }
    if summaries.is_empty() {
        return Err(MetricsError::EmptyInput("no model summaries"));
    }
    let recog: Vec<f64> = grades.iter().map(|g| g.style_recognition).collect();
    let aesth: Vec<f64> = grades.iter().map(|g| g.aesthetic_value).collect();
    let mean_style_recognition = mean(&recog).expect("non-empty");
    let mapped_distance = grade_to_distance(mean_style_recognition)?;
    let mut ranking: Vec<ModelGap> = summaries
        .iter()
        .map(|s| ModelGap { model_id: s.model_id, average: s.average, gap: (mapped_distance - s.average).abs() })
        .collect();
    ranking.sort_by(|a, b| a.gap.total_cmp(&b.gap).then(a.model_id.cmp(&b.model_id)));
    Ok(GradeAlignment {
        n_grades: grades.len(),
        mean_style_recognition,
        mean_aesthetic_value: mean(&aesth).expect("non-empty"),
        mapped_distance,
        ranking,
    })
}
