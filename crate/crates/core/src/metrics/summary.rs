use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{mean, population_variance};
use super::{GroupDistances, MetricsError};
use crate::model::ModelId;
use crate::par::{self, Execution};

/// Which distances make up the "discrimination" variance pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariancePool {
    /// Original-to-pastiche distances only.
    #[default]
    OpOnly,
    /// Original-to-pastiche plus pastiche-to-pastiche distances.
    AllPairs,
}

/// Corpus-level statistics of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: ModelId,
    /// Mean original-to-pastiche-k distance, per pastiche index.
    pub mean_o_p: Vec<f64>,
    /// Mean of `mean_o_p`; the midpoint of the first two for two-pastiche corpora.
    pub average: f64,
    /// Mean pastiche-to-pastiche distance; absent when no group has two pastiches.
    pub mean_p_p: Option<f64>,
    /// Population variance of the configured pool.
    pub variance: f64,
    /// Mean absolute difference between a group's original-to-pastiche distances;
    /// absent when no group has two pastiches.
    pub consistency: Option<f64>,
    pub n_groups: usize,
}

impl ModelSummary {
    pub fn mean_o_p1(&self) -> f64 {
        self.mean_o_p[0]
    }

    pub fn mean_o_p2(&self) -> Option<f64> {
        self.mean_o_p.get(1).copied()
    }

    /// Recomputes `average` from the column means.
    pub fn expected_average(&self) -> f64 {
        mean(&self.mean_o_p).unwrap_or(f64::NAN)
    }
}

/// Aggregates one model's group distances.
pub fn model_summary(groups: &[GroupDistances], pool: VariancePool) -> Result<ModelSummary, MetricsError> {
    let first = groups.first().ok_or(MetricsError::EmptyInput("no distances to summarize"))?;
    let model_id = first.model_id;
    if let Some(g) = groups.iter().find(|g| g.model_id != model_id) {
        return Err(MetricsError::ModelMismatch(model_id, g.model_id));
    }
    let columns = groups.iter().map(|g| g.to_original.len()).max().unwrap_or(0);
    if columns == 0 {
        return Err(MetricsError::EmptyInput("groups without pastiche distances"));
    }
    let all = groups.iter().flat_map(|g| g.to_original.iter().chain(&g.between_pastiches));
    if all.clone().any(|d| !d.is_finite()) {
        return Err(MetricsError::NonFinite("group distances"));
    }

    let mean_o_p: Vec<f64> = (0..columns)
        .map(|k| {
            let col: Vec<f64> = groups.iter().filter_map(|g| g.to_original.get(k).copied()).collect();
            mean(&col).expect("column k exists in at least one group")
        })
        .collect();
    let average = mean(&mean_o_p).expect("at least one column");

    let pp: Vec<f64> = groups.iter().flat_map(|g| g.between_pastiches.iter().copied()).collect();
    let mean_p_p = mean(&pp);

    let pooled: Vec<f64> = match pool {
        VariancePool::OpOnly => groups.iter().flat_map(|g| g.to_original.iter().copied()).collect(),
        VariancePool::AllPairs => all.copied().collect(),
    };
    let variance = population_variance(&pooled).expect("pool is non-empty");

    let diffs: Vec<f64> = groups
        .iter()
        .filter(|g| g.to_original.len() >= 2)
        .map(|g| {
            let d = &g.to_original;
            let mut abs = Vec::new();
            for i in 0..d.len() {
                for j in i + 1..d.len() {
                    abs.push((d[i] - d[j]).abs());
                }
            }
            mean(&abs).expect("at least one pair")
        })
        .collect();
    let consistency = mean(&diffs);

    Ok(ModelSummary {
        model_id,
        mean_o_p,
        average,
        mean_p_p,
        variance,
        consistency,
        n_groups: groups.len(),
    })
}

/// One summary per model present in `by_model`, computed concurrently, in model order.
pub fn summarize_models(
    by_model: &BTreeMap<ModelId, Vec<GroupDistances>>,
    pool: VariancePool,
    exec: Execution,
) -> Result<Vec<ModelSummary>, MetricsError> {
    let work: Vec<&Vec<GroupDistances>> = by_model.values().collect();
    par::try_map(exec, &work, |g| model_summary(g, pool))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::DistanceTriplet;
    use proptest::prelude::*;

    fn t(id: &str, a: f64, b: f64, c: f64) -> GroupDistances {
        DistanceTriplet { group_id: id.into(), model_id: ModelId::AdainStyle, d_o_p1: a, d_o_p2: b, d_p1_p2: c }.into()
    }

    #[test]
    fn adain_row_average() {
        let s = model_summary(&[t("a", 0.05, 0.07, 0.06), t("b", 0.06, 0.072, 0.076)], VariancePool::OpOnly).unwrap();
        assert!((s.mean_o_p1() - 0.055).abs() < 1e-12);
        assert!((s.mean_o_p2().unwrap() - 0.071).abs() < 1e-12);
        assert!((s.average - 0.063).abs() < 1e-12);
        assert_eq!(s.average, (s.mean_o_p1() + s.mean_o_p2().unwrap()) / 2.0);
        assert!((s.mean_p_p.unwrap() - 0.068).abs() < 1e-12);
        assert!((s.consistency.unwrap() - 0.016).abs() < 1e-12);
    }

    #[test]
    fn identical_triplets_have_no_spread() {
        let gs: Vec<_> = (0..5).map(|i| t(&i.to_string(), 0.3, 0.3, 0.3)).collect();
        for pool in [VariancePool::OpOnly, VariancePool::AllPairs] {
            let s = model_summary(&gs, pool).unwrap();
            assert!(s.variance.abs() < 1e-18);
            assert_eq!(s.consistency, Some(0.0));
        }
    }

    #[test]
    fn all_pairs_pool_includes_pastiche_distance() {
        let s = model_summary(&[t("g", 0.1, 0.2, 0.3)], VariancePool::AllPairs).unwrap();
        assert!((s.variance - 0.006_666_666_666_666_667).abs() < 1e-15);
        let s = model_summary(&[t("g", 0.1, 0.2, 0.3)], VariancePool::OpOnly).unwrap();
        assert!((s.variance - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn ragged_groups() {
        let one = GroupDistances {
            group_id: "solo".into(),
            model_id: ModelId::AdainStyle,
            to_original: vec![0.4],
            between_pastiches: vec![],
        };
        let s = model_summary(&[one.clone()], VariancePool::OpOnly).unwrap();
        assert_eq!(s.mean_o_p, vec![0.4]);
        assert_eq!(s.average, 0.4);
        assert_eq!(s.consistency, None);
        assert_eq!(s.mean_p_p, None);
        let s = model_summary(&[one, t("g", 0.2, 0.3, 0.1)], VariancePool::OpOnly).unwrap();
        assert!((s.mean_o_p[0] - 0.3).abs() < 1e-15);
        assert_eq!(s.mean_o_p[1], 0.3);
        assert!((s.consistency.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_mixed() {
        assert!(matches!(model_summary(&[], VariancePool::OpOnly), Err(MetricsError::EmptyInput(_))));
        let mut other = t("b", 0.1, 0.1, 0.1);
        other.model_id = ModelId::Vgg19;
        assert!(matches!(
            model_summary(&[t("a", 0.1, 0.1, 0.1), other], VariancePool::OpOnly),
            Err(MetricsError::ModelMismatch(..))
        ));
    }

    proptest! {
        #[test]
        fn consistency_ignores_shared_shift(
            pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30),
            shift in -0.5f64..0.5,
        ) {
            let base: Vec<_> = pairs.iter().enumerate().map(|(i, &(a, b))| t(&i.to_string(), a, b, 0.5)).collect();
            let moved: Vec<_> = pairs.iter().enumerate().map(|(i, &(a, b))| t(&i.to_string(), a + shift, b + shift, 0.5)).collect();
            let c0 = model_summary(&base, VariancePool::OpOnly).unwrap().consistency.unwrap();
            let c1 = model_summary(&moved, VariancePool::OpOnly).unwrap().consistency.unwrap();
            prop_assert!((c0 - c1).abs() < 1e-12);
            let s = model_summary(&base, VariancePool::AllPairs).unwrap();
            prop_assert!(s.variance >= 0.0 && c0 >= 0.0);
            prop_assert_eq!(s.average, (s.mean_o_p[0] + s.mean_o_p[1]) / 2.0);
        }
    }
}
