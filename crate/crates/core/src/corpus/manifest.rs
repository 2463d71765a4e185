use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CorpusError;

pub const MANIFEST_VERSION: &str = "1";

/// Artist-assigned grades on a 1 (not at all) to 10 (completely) scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanGrades {
    pub style_recognition: f64,
    pub aesthetic_value: f64,
}

/// One original artwork plus its pastiches. Pastiche order matters:
/// index 0 is "pastiche 1", index 1 is "pastiche 2", and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupEntry {
    pub group_id: String,
    pub artist: String,
    pub title: String,
    pub original: PathBuf,
    pub pastiches: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grades: Option<HumanGrades>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageRole {
    Original,
    /// Zero-based pastiche index.
    Pastiche(usize),
}

impl GroupEntry {
    /// Original first, then pastiches in order.
    pub fn images(&self) -> impl Iterator<Item = (ImageRole, &Path)> {
        std::iter::once((ImageRole::Original, self.original.as_path())).chain(
            self.pastiches
                .iter()
                .enumerate()
                .map(|(i, p)| (ImageRole::Pastiche(i), p.as_path())),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub version: String,
    pub groups: Vec<GroupEntry>,
    /// Directory relative image paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn image_count(&self) -> usize {
        self.groups.iter().map(|g| 1 + g.pastiches.len()).sum()
    }

    /// Grades of every group that carries them, in manifest order.
    pub fn grades(&self) -> Vec<HumanGrades> {
        self.groups.iter().filter_map(|g| g.grades).collect()
    }

    pub fn max_pastiches(&self) -> usize {
        self.groups.iter().map(|g| g.pastiches.len()).max().unwrap_or(0)
    }

    fn check(&self) -> Result<(), CorpusError> {
        if self.version != MANIFEST_VERSION {
            return Err(CorpusError::Schema(format!(
                "unsupported version `{}` (expected `{MANIFEST_VERSION}`)",
                self.version
            )));
        }
        if self.groups.is_empty() {
            return Err(CorpusError::Schema("manifest has no groups".into()));
        }
        let mut ids = HashSet::new();
        for g in &self.groups {
            if g.group_id.is_empty() {
                return Err(CorpusError::Schema("empty group_id".into()));
            }
            if !ids.insert(g.group_id.as_str()) {
                return Err(CorpusError::Schema(format!("duplicate group_id `{}`", g.group_id)));
            }
            if g.pastiches.is_empty() {
                return Err(CorpusError::Schema(format!(
                    "group `{}` has an empty pastiche list",
                    g.group_id
                )));
            }
            if g.pastiches.iter().any(|p| p == &g.original) {
                return Err(CorpusError::Schema(format!(
                    "group `{}` lists its original as a pastiche",
                    g.group_id
                )));
            }
            if let Some(grades) = g.grades {
                for (field, value) in [
                    ("style_recognition", grades.style_recognition),
                    ("aesthetic_value", grades.aesthetic_value),
                ] {
                    if !(1.0..=10.0).contains(&value) {
                        return Err(CorpusError::GradeRange {
                            group_id: g.group_id.clone(),
                            field,
                            value,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses and structurally checks a manifest document. Image files are not touched.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<CorpusManifest, CorpusError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CorpusError::Parse(e.to_string()))?;
    let mut manifest: CorpusManifest =
        serde_json::from_value(value).map_err(|e| CorpusError::Schema(e.to_string()))?;
    manifest.base_dir = base_dir.to_path_buf();
    manifest.check()?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<CorpusManifest, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(id: &str, n: usize) -> serde_json::Value {
        let pastiches: Vec<String> = (1..=n).map(|i| format!("{id}_p{i}.png")).collect();
        serde_json::json!({
            "group_id": id, "artist": "A", "title": "T",
            "original": format!("{id}_o.png"), "pastiches": pastiches
        })
    }

    fn doc(groups: Vec<serde_json::Value>) -> String {
        serde_json::json!({ "version": "1", "groups": groups }).to_string()
    }

    #[test]
    fn minimal_manifest() {
        let m = parse_manifest(&doc(vec![group("g1", 2)]), Path::new("/data")).unwrap();
        assert_eq!(m.groups.len(), 1);
        assert_eq!(m.resolve(&m.groups[0].original), Path::new("/data/g1_o.png"));
    }

    #[test]
    fn duplicate_group_is_schema_error() {
        let err = parse_manifest(&doc(vec![group("g1", 2), group("g1", 2)]), Path::new(".")).unwrap_err();
        assert!(matches!(err, CorpusError::Schema(ref s) if s.contains("g1")), "{err}");
    }

    #[test]
    fn thirty_six_pairs_reference_108_images() {
        let groups = (0..36).map(|i| group(&format!("g{i}"), 2)).collect();
        let m = parse_manifest(&doc(groups), Path::new(".")).unwrap();
        assert_eq!(m.groups.len(), 36);
        assert_eq!(m.image_count(), 108);
    }

    #[test]
    fn malformed_and_schema_errors_are_distinct() {
        assert!(matches!(parse_manifest("{ nope", Path::new(".")), Err(CorpusError::Parse(_))));
        let missing = r#"{"version":"1","groups":[{"group_id":"g","artist":"a","title":"t","pastiches":["x"]}]}"#;
        assert!(matches!(parse_manifest(missing, Path::new(".")), Err(CorpusError::Schema(_))));
        assert!(matches!(
            parse_manifest(&doc(vec![group("g", 0)]), Path::new(".")),
            Err(CorpusError::Schema(_))
        ));
        assert!(matches!(parse_manifest(&doc(vec![]), Path::new(".")), Err(CorpusError::Schema(_))));
    }

    #[test]
    fn original_reused_as_pastiche_rejected() {
        let mut g = group("g", 1);
        g["pastiches"] = serde_json::json!(["g_o.png"]);
        assert!(matches!(parse_manifest(&doc(vec![g]), Path::new(".")), Err(CorpusError::Schema(_))));
    }

    #[test]
    fn grades_are_range_checked() {
        let mut g = group("g", 2);
        g["grades"] = serde_json::json!({"style_recognition": 10.0, "aesthetic_value": 1.0});
        assert!(parse_manifest(&doc(vec![g.clone()]), Path::new(".")).is_ok());
        g["grades"] = serde_json::json!({"style_recognition": 10.5, "aesthetic_value": 1.0});
        let err = parse_manifest(&doc(vec![g.clone()]), Path::new(".")).unwrap_err();
        assert!(matches!(err, CorpusError::GradeRange { field: "style_recognition", .. }));
        g["grades"] = serde_json::json!({"style_recognition": 5.0, "aesthetic_value": 0.0});
        assert!(matches!(
            parse_manifest(&doc(vec![g]), Path::new(".")),
            Err(CorpusError::GradeRange { field: "aesthetic_value", .. })
        ));
    }
}
