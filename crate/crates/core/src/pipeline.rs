//! End-to-end commands: validate, extract, analyze and run.
//!
//! Every command is a function of its [`RunConfig`]; outputs are written in
//! key order so repeated runs (at any parallelism) produce identical bytes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{BackendConfig, ConfigError, RunConfig};
use crate::corpus::{self, load_manifest, load_rgb, preprocess_image, CorpusError, CorpusManifest, ValidationReport};
use crate::extraction::{self, extract_embedding, Embedding, EmbeddingStore, ExtractionError, InferenceBackend};
use crate::metrics::{
    classify_corpus, correlation_matrix, correlation_series, grade_alignment, group_distances, summarize_models,
    GroupDistances, MetricsError,
};
use crate::model::{ModelId, ModelSpec};
use crate::par::{self, Execution};
use crate::report::{self, DashboardReport, ReportError};

/// Files written by [`cmd_analyze`], relative to the output directory.
pub const REPORT_FILES: [&str; 5] = ["summary.csv", "summary.txt", "discrimination.csv", "correlations.csv", "dashboard.json"];
pub const PLOTS_DIR: &str = "plots";
pub const VALIDATION_FILE: &str = "validation.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Manifest(CorpusError),
    #[error("{failures} corpus file(s) failed validation")]
    ValidationFailed { failures: usize },
    #[error("image {path}: {reason}")]
    Image { path: PathBuf, reason: String },
    #[error("missing embeddings: {}", .0.iter().map(|(p, m)| format!("{} [{m}]", p.display())).collect::<Vec<_>>().join(", "))]
    MissingEmbeddings(Vec<(PathBuf, ModelId)>),
    #[error(transparent)]
    Backend(#[from] ExtractionError),
    #[error("analysis failed: {0}")]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    /// 0 success, 1 data failure, 2 configuration or manifest failure, 3 backend or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Manifest(_) => 2,
            PipelineError::ValidationFailed { .. }
            | PipelineError::Image { .. }
            | PipelineError::MissingEmbeddings(_)
            | PipelineError::Metrics(_) => 1,
            PipelineError::Backend(e) => match e {
                ExtractionError::DimensionMismatch { .. } | ExtractionError::NonFinite { .. } => 1,
                _ => 3,
            },
            PipelineError::Report(e) => match e {
                ReportError::Io { .. } | ReportError::Serialize(_) => 3,
                _ => 1,
            },
            PipelineError::Io { .. } => 3,
            PipelineError::Stage { source, .. } => source.exit_code(),
        }
    }

    fn in_stage(self, stage: &'static str) -> Self {
        PipelineError::Stage { stage, source: Box::new(self) }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn load(cfg: &RunConfig) -> Result<CorpusManifest, PipelineError> {
    load_manifest(&cfg.manifest_path).map_err(PipelineError::Manifest)
}

/// Instantiates the configured backend.
pub fn resolve_backend(cfg: &RunConfig) -> Result<Box<dyn InferenceBackend>, PipelineError> {
    match &cfg.backend {
        BackendConfig::Mock { seed } => Ok(Box::new(extraction::mock_backend(*seed))),
        #[cfg(feature = "onnx")]
        BackendConfig::Graphs { .. } => Ok(Box::new(extraction::OnnxBackend::new())),
        #[cfg(not(feature = "onnx"))]
        BackendConfig::Graphs { .. } => Err(ConfigError("graph backend requires the `onnx` feature".into()).into()),
    }
}

/// Checks every image in the manifest and writes `validation.json` to the output directory.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport, PipelineError> {
    let manifest = load(cfg)?;
    let report = corpus::validate_corpus(&manifest, cfg.execution());
    let value = serde_json::to_value(&report).expect("validation report serializes");
    write_file(&cfg.out_dir.join(VALIDATION_FILE), &report::canonical_json(&value))?;
    Ok(report)
}

/// Distinct images of the manifest, keyed by content.
struct ImageIndex {
    /// Manifest-relative path to content key, for every referenced path.
    keys: HashMap<PathBuf, String>,
    /// Content key to one resolved path carrying it, in key order.
    unique: BTreeMap<String, PathBuf>,
}

fn index_images(manifest: &CorpusManifest, exec: Execution) -> Result<ImageIndex, PipelineError> {
    let paths: Vec<PathBuf> = manifest
        .groups
        .iter()
        .flat_map(|g| g.images().map(|(_, p)| p.to_path_buf()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let keys = par::try_map(exec, &paths, |rel| {
        load_rgb(&manifest.resolve(rel))
            .map(|img| img.key())
            .map_err(|e| PipelineError::Image { path: rel.clone(), reason: e.to_string() })
    })?;
    let mut unique = BTreeMap::new();
    for (rel, key) in paths.iter().zip(&keys) {
        unique.entry(key.clone()).or_insert_with(|| manifest.resolve(rel));
    }
    Ok(ImageIndex { keys: paths.into_iter().zip(keys).collect(), unique })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractStats {
    pub images: usize,
    pub computed: usize,
    pub reused: usize,
}

/// Computes every missing `(image, model)` embedding with `backend` and caches it.
pub fn extract_with(
    cfg: &RunConfig,
    manifest: &CorpusManifest,
    backend: &dyn InferenceBackend,
) -> Result<ExtractStats, PipelineError> {
    let store = EmbeddingStore::open(&cfg.cache_dir)?;
    let specs = cfg.specs();
    let index = index_images(manifest, cfg.execution())?;

    let mut reused = 0;
    let mut todo: Vec<(String, PathBuf, Vec<&ModelSpec>)> = Vec::new();
    for (key, path) in &index.unique {
        let mut missing = Vec::new();
        for spec in &specs {
            if store.contains(spec.model_id, key)? {
                reused += 1;
            } else {
                missing.push(spec);
            }
        }
        if !missing.is_empty() {
            todo.push((key.clone(), path.clone(), missing));
        }
    }

    let computed = par::try_map(cfg.execution(), &todo, |(key, path, missing)| {
        let img = load_rgb(path).map_err(|e| PipelineError::Image { path: path.clone(), reason: e.to_string() })?;
        let mut tensors: HashMap<_, corpus::PreprocessedTensor> = HashMap::new();
        for spec in missing {
            let pk = spec.preprocess_key();
            if !tensors.contains_key(&pk) {
                let t = preprocess_image(&img.rgb, spec)
                    .map_err(|e| PipelineError::Image { path: path.clone(), reason: e.to_string() })?;
                tensors.insert(pk, t);
            }
            let mut tensor = tensors[&pk].clone();
            tensor.model_id = spec.model_id;
            let emb = extract_embedding(&tensor, spec, backend, key)?;
            store.put(&emb)?;
        }
        Ok::<usize, PipelineError>(missing.len())
    })?
    .into_iter()
    .sum();

    Ok(ExtractStats { images: index.unique.len(), computed, reused })
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<ExtractStats, PipelineError> {
    let manifest = load(cfg)?;
    let backend = resolve_backend(cfg)?;
    extract_with(cfg, &manifest, backend.as_ref())
}

fn fingerprint(manifest: &CorpusManifest, index: &ImageIndex) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(manifest).expect("manifest serializes"));
    for g in &manifest.groups {
        for (_, p) in g.images() {
            h.update(b"\n");
            h.update(index.keys[p].as_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Builds the dashboard from cached embeddings without writing anything.
pub fn analyze(cfg: &RunConfig, manifest: &CorpusManifest) -> Result<DashboardReport, PipelineError> {
    let store = EmbeddingStore::open(&cfg.cache_dir)?;
    let index = index_images(manifest, cfg.execution())?;

    let mut embeddings: HashMap<(ModelId, &str), Embedding> = HashMap::new();
    let mut missing = Vec::new();
    for g in &manifest.groups {
        for (_, rel) in g.images() {
            let key = index.keys[rel].as_str();
            for &m in &cfg.models {
                if embeddings.contains_key(&(m, key)) {
                    continue;
                }
                match store.get(m, key)? {
                    Some(e) => {
                        embeddings.insert((m, key), e);
                    }
                    None => missing.push((rel.to_path_buf(), m)),
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.dedup();
        return Err(PipelineError::MissingEmbeddings(missing));
    }

    let work: Vec<(&corpus::GroupEntry, ModelId)> =
        manifest.groups.iter().flat_map(|g| cfg.models.iter().map(move |&m| (g, m))).collect();
    let distances: Vec<GroupDistances> = par::try_map(cfg.execution(), &work, |&(g, m)| {
        let get = |p: &Path| &embeddings[&(m, index.keys[p].as_str())];
        let pastiches: Vec<&Embedding> = g.pastiches.iter().map(|p| get(p)).collect();
        group_distances(&g.group_id, get(&g.original), &pastiches)
    })?;

    let mut by_model: BTreeMap<ModelId, Vec<GroupDistances>> = BTreeMap::new();
    for d in &distances {
        by_model.entry(d.model_id).or_default().push(d.clone());
    }
    let summaries = summarize_models(&by_model, cfg.variance_pool, cfg.execution())?;
    let correlations = correlation_matrix(&correlation_series(&distances), cfg.execution())?;

    let (gap_references, gap_labels) =
        if cfg.models.contains(&ModelId::Dinov2) && cfg.models.contains(&ModelId::AdainStyle) {
            let (refs, labels) = classify_corpus(&distances, cfg.gap_policy)?;
            (Some(refs), labels)
        } else {
            (None, BTreeMap::new())
        };
    let grades = manifest.grades();
    let grade_alignment = if grades.is_empty() { None } else { Some(grade_alignment(&grades, &summaries)?) };

    Ok(DashboardReport {
        corpus_fingerprint: fingerprint(manifest, &index),
        summaries,
        correlations,
        gap_references,
        gap_labels,
        grade_alignment,
        distances,
        config_echo: cfg.clone(),
    })
}

/// Writes every dashboard artifact for `report` into `cfg.out_dir`.
pub fn write_dashboard(cfg: &RunConfig, report: &DashboardReport) -> Result<Vec<PathBuf>, PipelineError> {
    let out = &cfg.out_dir;
    let summary = report::render_summary_table(&report.summaries)?;
    let discrimination = report::render_discrimination_table(&report.summaries)?;
    let json = report.to_canonical_json()?;
    let contents = [
        summary.to_csv(),
        summary.to_text(),
        discrimination.to_csv(),
        report::render_correlations_csv(&report.correlations),
        json,
    ];
    let mut files = Vec::new();
    for (name, text) in REPORT_FILES.iter().zip(contents) {
        let path = out.join(name);
        write_file(&path, &text)?;
        files.push(path);
    }
    let plots = out.join(PLOTS_DIR);
    if plots.exists() {
        fs::remove_dir_all(&plots).map_err(io_err(&plots))?;
    }
    files.extend(report::emit_plots(&report.distances, &report.correlations, &plots)?);
    Ok(files)
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<DashboardReport, PipelineError> {
    let manifest = load(cfg)?;
    let report = analyze(cfg, &manifest)?;
    write_dashboard(cfg, &report)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub validation: ValidationReport,
    pub extract: ExtractStats,
    pub report: DashboardReport,
}

/// Validate, extract, analyze; stops at the first failing stage.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let validation = cmd_validate(cfg).map_err(|e| e.in_stage("validate"))?;
    if !validation.is_clean() {
        return Err(PipelineError::ValidationFailed { failures: validation.failures }.in_stage("validate"));
    }
    let extract = cmd_extract(cfg).map_err(|e| e.in_stage("extract"))?;
    let report = cmd_analyze(cfg).map_err(|e| e.in_stage("analyze"))?;
    Ok(RunOutcome { validation, extract, report })
}

