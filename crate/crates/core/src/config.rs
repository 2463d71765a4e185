//! Effective run configuration, echoed verbatim into every dashboard.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::metrics::{GapPolicy, VariancePool};
use crate::model::{ModelId, ModelSpec};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    /// Exported ONNX graphs named `<MODEL_ID>.onnx` inside `graphs_dir`.
    Graphs { graphs_dir: PathBuf },
    /// Weight-free deterministic stand-in.
    Mock { seed: u64 },
}

impl BackendConfig {
    fn graphs_dir(&self) -> PathBuf {
        match self {
            BackendConfig::Graphs { graphs_dir } => graphs_dir.clone(),
            BackendConfig::Mock { .. } => PathBuf::from("graphs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifest_path: PathBuf,
    /// Selected models, kept in registry order without duplicates.
    pub models: Vec<ModelId>,
    pub backend: BackendConfig,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub variance_pool: VariancePool,
    pub gap_policy: GapPolicy,
    /// Worker threads; never affects output bytes, so it is not echoed.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    /// Defaults: every model, op-only variance pool, median gap references.
    pub fn new(manifest_path: impl Into<PathBuf>, backend: BackendConfig) -> Self {
        RunConfig {
            manifest_path: manifest_path.into(),
            models: ModelId::ALL.to_vec(),
            backend,
            cache_dir: PathBuf::from(".style-dashboard-cache"),
            out_dir: PathBuf::from("dashboard"),
            variance_pool: VariancePool::default(),
            gap_policy: GapPolicy::default(),
            jobs: None,
        }
    }

    /// Sorts and dedups `models`, then checks the invariants.
    pub fn normalized(mut self) -> Result<Self, ConfigError> {
        self.models.sort();
        self.models.dedup();
        if self.models.is_empty() {
            return Err(ConfigError("at least one model must be selected".into()));
        }
        if let crate::metrics::GapPolicy::Absolute { dino_ref, adain_ref } = self.gap_policy {
            if !dino_ref.is_finite() || !adain_ref.is_finite() {
                return Err(ConfigError("absolute gap references must be finite".into()));
            }
        }
        if self.jobs == Some(0) {
            return Err(ConfigError("--jobs must be at least 1".into()));
        }
        Ok(self)
    }

    /// `jobs = 1` selects the sequential path; anything else fans out.
    pub fn execution(&self) -> Execution {
        match self.jobs {
            Some(1) => Execution::Sequential,
            _ => Execution::Parallel,
        }
    }

    pub fn specs(&self) -> Vec<ModelSpec> {
        let dir = self.backend.graphs_dir();
        self.models.iter().map(|&m| ModelSpec::standard(m, &dir)).collect()
    }
}
