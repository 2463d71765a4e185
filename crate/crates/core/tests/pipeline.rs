use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use style_dashboard::config::{BackendConfig, RunConfig};
use style_dashboard::pipeline::{
    cmd_analyze, cmd_extract, cmd_run, cmd_validate, PipelineError, PLOTS_DIR, REPORT_FILES, VALIDATION_FILE,
};
use style_dashboard::report::DashboardReport;
use style_dashboard::ModelId;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

fn mock_cfg(work: &Path, seed: u64) -> RunConfig {
    RunConfig {
        cache_dir: work.join("cache"),
        out_dir: work.join("out"),
        ..RunConfig::new(fixture_dir().join("manifest.json"), BackendConfig::Mock { seed })
    }
}

/// Copies the fixture corpus so a test can damage it.
fn copy_fixture(dst: &Path) -> PathBuf {
    fs::create_dir_all(dst).unwrap();
    for entry in fs::read_dir(fixture_dir()).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, dst.join(p.file_name().unwrap())).unwrap();
    }
    dst.join("manifest.json")
}

/// Relative path to SHA-256 for every file below `dir`.
fn dir_digest(dir: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let digest = hex::encode(Sha256::digest(fs::read(&p).unwrap()));
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), digest);
            }
        }
    }
    out
}

fn innermost(err: &PipelineError) -> &PipelineError {
    match err {
        PipelineError::Stage { source, .. } => innermost(source),
        e => e,
    }
}

#[test]
fn extract_fills_and_then_reuses_the_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(tmp.path(), 7);
    let first = cmd_extract(&cfg).unwrap();
    assert_eq!((first.images, first.computed, first.reused), (9, 45, 0));
    assert_eq!(dir_digest(&cfg.cache_dir).len(), 45);
    let second = cmd_extract(&cfg).unwrap();
    assert_eq!((second.computed, second.reused), (0, 45));
}

#[test]
fn same_seed_same_cache_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_extract(&mock_cfg(a.path(), 7)).unwrap();
    cmd_extract(&mock_cfg(b.path(), 7)).unwrap();
    let da = dir_digest(&a.path().join("cache"));
    assert_eq!(da, dir_digest(&b.path().join("cache")));

    let c = tempfile::tempdir().unwrap();
    cmd_extract(&mock_cfg(c.path(), 8)).unwrap();
    assert_ne!(da, dir_digest(&c.path().join("cache")));
}

#[test]
fn analyze_without_embeddings_fails_with_data_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(tmp.path(), 7);
    let err = cmd_analyze(&cfg).unwrap_err();
    assert!(matches!(innermost(&err), PipelineError::MissingEmbeddings(m) if m.len() == 45), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn analyze_reports_only_what_is_missing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig { models: vec![ModelId::Vgg19], ..mock_cfg(tmp.path(), 7) };
    cmd_extract(&cfg).unwrap();
    let wider = RunConfig { models: vec![ModelId::Vgg19, ModelId::Dinov2], ..cfg };
    match innermost(&cmd_analyze(&wider).unwrap_err()) {
        PipelineError::MissingEmbeddings(m) => {
            assert_eq!(m.len(), 9);
            assert!(m.iter().all(|(_, id)| *id == ModelId::Dinov2));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn single_model_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig { models: vec![ModelId::Vgg19], ..mock_cfg(tmp.path(), 3) };
    let out = cmd_run(&cfg).unwrap();
    assert_eq!(out.extract.computed, 9);
    assert_eq!(out.report.summaries.len(), 1);
    assert_eq!(out.report.summaries[0].model_id, ModelId::Vgg19);
    assert!(out.report.gap_labels.is_empty() && out.report.gap_references.is_none());
    let csv = fs::read_to_string(cfg.out_dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn corrupted_image_stops_at_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = copy_fixture(&tmp.path().join("corpus"));
    fs::write(manifest.with_file_name("g02_pastiche1.png"), b"\x89PNG\r\n\x1a\nnot really").unwrap();
    let cfg = RunConfig { manifest_path: manifest, ..mock_cfg(tmp.path(), 7) };

    let report = cmd_validate(&cfg).unwrap();
    assert_eq!(report.failures, 1);
    assert_eq!(report.failed().next().unwrap().group_id, "g02");
    assert!(cfg.out_dir.join(VALIDATION_FILE).is_file());

    let err = cmd_run(&cfg).unwrap_err();
    assert!(matches!(innermost(&err), PipelineError::ValidationFailed { failures: 1 }), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(!cfg.cache_dir.exists());
    assert!(!cfg.out_dir.join("dashboard.json").exists());
}

#[test]
fn validation_flags_convertible_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let report = cmd_validate(&mock_cfg(tmp.path(), 7)).unwrap();
    assert!(report.is_clean());
    assert_eq!((report.groups, report.images), (3, 9));
    let json = fs::read_to_string(tmp.path().join("out").join(VALIDATION_FILE)).unwrap();
    assert_eq!(json.matches("\"convertible\"").count(), 2);
}

#[test]
fn missing_manifest_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig { manifest_path: tmp.path().join("nope.json"), ..mock_cfg(tmp.path(), 7) };
    assert_eq!(cmd_run(&cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn report_files_are_complete_and_parse_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(tmp.path(), 5);
    let out = cmd_run(&cfg).unwrap();
    for f in REPORT_FILES {
        assert!(cfg.out_dir.join(f).is_file(), "{f}");
    }
    let plots: Vec<_> = fs::read_dir(cfg.out_dir.join(PLOTS_DIR)).unwrap().collect();
    assert_eq!(plots.len(), 1 + 5 + 10);

    let text = fs::read_to_string(cfg.out_dir.join("dashboard.json")).unwrap();
    let back = DashboardReport::from_json(&text).unwrap();
    assert_eq!(back.summaries.len(), 5);
    assert_eq!(back.gap_labels.len(), 3);
    assert_eq!(back.config_echo, cfg);
    assert_eq!(back.corpus_fingerprint, out.report.corpus_fingerprint);
    assert_eq!(back.grade_alignment.unwrap().n_grades, 3);
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let seq = RunConfig { jobs: Some(1), ..mock_cfg(a.path(), 9) };
    let par = RunConfig { jobs: Some(4), ..mock_cfg(b.path(), 9) };
    let rs = style_dashboard::par::with_jobs(seq.jobs, || cmd_run(&seq)).unwrap();
    let rp = style_dashboard::par::with_jobs(par.jobs, || cmd_run(&par)).unwrap();
    assert_eq!(rs.report.summaries, rp.report.summaries);
    assert_eq!(rs.report.correlations, rp.report.correlations);
    assert_eq!(rs.report.distances, rp.report.distances);
    assert_eq!(dir_digest(&a.path().join("cache")), dir_digest(&b.path().join("cache")));
    for f in ["summary.csv", "discrimination.csv", "correlations.csv"] {
        assert_eq!(fs::read(seq.out_dir.join(f)).unwrap(), fs::read(par.out_dir.join(f)).unwrap(), "{f}");
    }
}
