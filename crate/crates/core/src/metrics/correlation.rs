use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::CompensatedSum;
use super::{GroupDistances, MetricsError};
use crate::model::ModelId;
use crate::par::{self, Execution};

/// Values keyed by `<group_id>/o_p<k>`, in key order.
pub type KeyedSeries = Vec<(String, f64)>;

/// Pearson product-moment correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricsError::EmptyInput("correlation needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().copied().collect::<CompensatedSum>().total() / n;
    let my = y.iter().copied().collect::<CompensatedSum>().total() / n;
    let (mut sxy, mut sxx, mut syy) = (CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    let (sxx, syy) = (sxx.total(), syy.total());
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ConstantSeries);
    }
    let r = sxy.total() / (sxx * syy).sqrt();
    if !r.is_finite() {
        return Err(MetricsError::NonFinite("correlation"));
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Original-to-pastiche distances per model, keyed by `(group, pastiche)`
/// and sorted by key.
pub fn correlation_series(distances: &[GroupDistances]) -> BTreeMap<ModelId, KeyedSeries> {
    let mut out: BTreeMap<ModelId, KeyedSeries> = BTreeMap::new();
    for g in distances {
        let series = out.entry(g.model_id).or_default();
        for (k, d) in g.to_original.iter().enumerate() {
            series.push((format!("{}/o_p{}", g.group_id, k + 1), *d));
        }
    }
    for s in out.values_mut() {
        s.sort_by(|a, b| a.0.cmp(&b.0));
    }
    out
}

/// Symmetric model-agreement matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub model_ids: Vec<ModelId>,
    pub r: Vec<Vec<f64>>,
    /// Keys the series were aligned on, in order.
    pub series_keys: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: ModelId, b: ModelId) -> Option<f64> {
        let i = self.model_ids.iter().position(|&m| m == a)?;
        let j = self.model_ids.iter().position(|&m| m == b)?;
        Some(self.r[i][j])
    }

    /// Off-diagonal pairs `(a, b, r)` with `a` before `b` in model order.
    pub fn pairs(&self) -> Vec<(ModelId, ModelId, f64)> {
        let n = self.model_ids.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push((self.model_ids[i], self.model_ids[j], self.r[i][j]));
            }
        }
        out
    }
}

/// Pairwise Pearson correlation between per-model series. Every series must
/// carry the same keys in the same order.
pub fn correlation_matrix(
    series: &BTreeMap<ModelId, KeyedSeries>,
    exec: Execution,
) -> Result<CorrelationMatrix, MetricsError> {
    let (&first_model, first) = series.iter().next().ok_or(MetricsError::EmptyInput("no series"))?;
    let keys: Vec<String> = first.iter().map(|(k, _)| k.clone()).collect();
    for (m, s) in series {
        if s.len() != keys.len() || s.iter().zip(&keys).any(|((k, _), key)| k != key) {
            return Err(MetricsError::Alignment(format!(
                "{m} series keys differ from {first_model}'s"
            )));
        }
    }
    let model_ids: Vec<ModelId> = series.keys().copied().collect();
    let values: Vec<Vec<f64>> = series.values().map(|s| s.iter().map(|(_, v)| *v).collect()).collect();
    let n = model_ids.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let rs = par::try_map(exec, &pairs, |&(i, j)| pearson(&values[i], &values[j]))?;
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        r[i][i] = 1.0;
    }
    for (&(i, j), v) in pairs.iter().zip(rs) {
        r[i][j] = v;
        r[j][i] = v;
    }
    Ok(CorrelationMatrix { model_ids, r, series_keys: keys })
}
