//! Corpus manifests, image loading and per-model preprocessing.

mod image_io;
mod manifest;
mod preprocess;
mod validate;

use std::path::PathBuf;

pub use image_io::{image_key, load_rgb, ColorSource, LoadedImage};
pub use manifest::{load_manifest, parse_manifest, CorpusManifest, GroupEntry, HumanGrades, ImageRole};
pub use preprocess::{preprocess_image, PreprocessedTensor};
pub use validate::{validate_corpus, FileStatus, FileCheck, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Parse(String),
    #[error("manifest schema violation: {0}")]
    Schema(String),
    #[error("group `{group_id}`: {field} grade {value} outside [1, 10]")]
    GradeRange {
        group_id: String,
        field: &'static str,
        value: f64,
    },
    #[error("cannot decode image {path}: {reason}")]
    Decode { path: PathBuf, reason: String },
}
