use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{load_rgb, ColorSource, CorpusManifest, ImageRole};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FileStatus {
    Ok,
    /// Decodable, but promoted or flattened to RGB.
    Convertible { from: ColorSource },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileCheck {
    pub group_id: String,
    pub role: ImageRole,
    pub path: PathBuf,
    #[serde(flatten)]
    pub status: FileStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub groups: usize,
    pub images: usize,
    pub failures: usize,
    pub files: Vec<FileCheck>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.failures == 0
    }

    pub fn failed(&self) -> impl Iterator<Item = &FileCheck> {
        self.files.iter().filter(|f| matches!(f.status, FileStatus::Failed { .. }))
    }
}

/// Opens and decodes every referenced image. Per-file problems are recorded,
/// never raised.
pub fn validate_corpus(manifest: &CorpusManifest, exec: Execution) -> ValidationReport {
    let jobs: Vec<(&str, ImageRole, PathBuf)> = manifest
        .groups
        .iter()
        .flat_map(|g| g.images().map(move |(role, p)| (g.group_id.as_str(), role, p.to_path_buf())))
        .collect();
    let files: Vec<FileCheck> = par::map(exec, &jobs, |(group_id, role, rel)| {
        let status = match load_rgb(&manifest.resolve(rel)) {
            Ok(img) if img.source == ColorSource::Rgb => FileStatus::Ok,
            Ok(img) => FileStatus::Convertible { from: img.source },
            Err(e) => FileStatus::Failed { reason: e.to_string() },
        };
        FileCheck { group_id: group_id.to_string(), role: *role, path: rel.clone(), status }
    });
    let failures = files.iter().filter(|f| matches!(f.status, FileStatus::Failed { .. })).count();
    ValidationReport { groups: manifest.groups.len(), images: files.len(), failures, files }
}
