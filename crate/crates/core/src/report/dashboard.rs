use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ReportError;
use crate::config::RunConfig;
use crate::metrics::{CorrelationMatrix, GapLabel, GapReferences, GradeAlignment, GroupDistances, ModelSummary};

/// Everything the dashboard reports, at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DashboardReport {
    /// SHA-256 over the manifest and the content keys of its images.
    pub corpus_fingerprint: String,
    pub summaries: Vec<ModelSummary>,
    pub correlations: CorrelationMatrix,
    /// Present when both DINOv2 and AdaIN-Style were analysed.
    pub gap_references: Option<GapReferences>,
    pub gap_labels: BTreeMap<String, GapLabel>,
    /// Present when the manifest carries human grades.
    pub grade_alignment: Option<GradeAlignment>,
    pub distances: Vec<GroupDistances>,
    pub config_echo: RunConfig,
}

/// Pretty JSON with object keys sorted and numbers in shortest round-trip form.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

impl DashboardReport {
    pub fn to_canonical_json(&self) -> Result<String, ReportError> {
        for &m in &self.config_echo.models {
            if !self.summaries.iter().any(|s| s.model_id == m) {
                return Err(ReportError::Serialize(format!("missing summary for {m}")));
            }
        }
        if self.summaries.len() != self.config_echo.models.len() {
            return Err(ReportError::Serialize("summaries for models that were not configured".into()));
        }
        let value = serde_json::to_value(self).map_err(|e| ReportError::Serialize(e.to_string()))?;
        Ok(canonical_json(&value))
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Serialize(e.to_string()))
    }
}

pub fn emit_dashboard_json(report: &DashboardReport, path: &Path) -> Result<(), ReportError> {
    let text = report.to_canonical_json()?;
    fs::write(path, text).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BackendConfig;
    use crate::metrics::{model_summary, VariancePool};
    use crate::model::ModelId;

    fn report() -> DashboardReport {
        let d = GroupDistances {
            group_id: "g1".into(),
            model_id: ModelId::Vgg19,
            to_original: vec![0.1 + 0.2, 1.0 / 3.0],
            between_pastiches: vec![0.7],
        };
        let mut cfg = RunConfig::new("m.json", BackendConfig::Mock { seed: 3 });
        cfg.models = vec![ModelId::Vgg19];
        DashboardReport {
            corpus_fingerprint: "ab".into(),
            summaries: vec![model_summary(&[d.clone()], VariancePool::OpOnly).unwrap()],
            correlations: CorrelationMatrix { model_ids: vec![ModelId::Vgg19], r: vec![vec![1.0]], series_keys: vec!["g1/o_p1".into()] },
            gap_references: None,
            gap_labels: BTreeMap::new(),
            grade_alignment: None,
            distances: vec![d],
            config_echo: cfg,
        }
    }

    #[test]
    fn canonical_bytes_round_trip() {
        let r = report();
        let a = r.to_canonical_json().unwrap();
        assert_eq!(a, r.to_canonical_json().unwrap());
        let back = DashboardReport::from_json(&a).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_canonical_json().unwrap(), a);
        let reparsed: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(canonical_json(&reparsed), a);
        assert!(a.contains("0.30000000000000004"));
    }

    #[test]
    fn keys_sorted() {
        let v: Value = serde_json::from_str(r#"{"b":1,"a":{"z":[],"c":{}}}"#).unwrap();
        assert_eq!(canonical_json(&v), "{\n  \"a\": {\n    \"c\": {},\n    \"z\": []\n  },\n  \"b\": 1\n}\n");
    }

    #[test]
    fn missing_summary_named() {
        let mut r = report();
        r.config_echo.models.push(ModelId::Dinov2);
        let err = r.to_canonical_json().unwrap_err();
        assert!(err.to_string().contains("DINOV2"), "{err}");
    }
}
