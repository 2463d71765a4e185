//! `style-dashboard`: validate a corpus, extract embeddings, and render the
//! multi-model similarity dashboard.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use style_dashboard::config::{BackendConfig, RunConfig};
use style_dashboard::metrics::{GapPolicy, VariancePool};
use style_dashboard::pipeline::{self, PipelineError};
use style_dashboard::{par, ModelId};

const CACHE_ENV: &str = "STYLE_DASHBOARD_CACHE";

#[derive(Parser)]
#[command(name = "style-dashboard", version, about = "Multi-embedding similarity dashboard for artworks and their pastiches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that every manifest image decodes to RGB.
    Validate(RunArgs),
    /// Compute and cache embeddings for every image and selected model.
    Extract(RunArgs),
    /// Build the dashboard from cached embeddings.
    Analyze(RunArgs),
    /// validate + extract + analyze.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Graphs,
    Mock,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    OpOnly,
    AllPairs,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma separated model ids, e.g. `DINOV2,VGG19`.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelId>>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Seed of the mock backend.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding `<MODEL_ID>.onnx` graphs.
    #[arg(long)]
    graphs_dir: Option<PathBuf>,
    /// Embedding cache directory (falls back to $STYLE_DASHBOARD_CACHE).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    variance_pool: Option<PoolArg>,
    /// `median` or `absolute:<dino_ref>,<adain_ref>`.
    #[arg(long, value_parser = parse_gap_policy)]
    gap_policy: Option<GapPolicy>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

/// On-disk configuration; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    manifest_path: Option<PathBuf>,
    models: Option<Vec<ModelId>>,
    backend: Option<BackendConfig>,
    cache_dir: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    variance_pool: Option<VariancePool>,
    gap_policy: Option<GapPolicy>,
}

fn parse_gap_policy(s: &str) -> Result<GapPolicy, String> {
    if s == "median" {
        return Ok(GapPolicy::Median);
    }
    let rest = s.strip_prefix("absolute:").ok_or("expected `median` or `absolute:<dino>,<adain>`")?;
    let (d, a) = rest.split_once(',').ok_or("expected `absolute:<dino>,<adain>`")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad reference `{v}`: {e}"));
    Ok(GapPolicy::Absolute { dino_ref: num(d)?, adain_ref: num(a)? })
}

fn read_config_file(path: &Path) -> anyhow::Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn merge(args: RunArgs) -> anyhow::Result<RunConfig> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => ConfigFile::default(),
    };
    let manifest = args
        .manifest
        .or(file.manifest_path)
        .ok_or_else(|| anyhow!("no manifest given (use --manifest or `manifest_path` in --config)"))?;

    let file_seed = match &file.backend {
        Some(BackendConfig::Mock { seed }) => Some(*seed),
        _ => None,
    };
    let file_graphs = match &file.backend {
        Some(BackendConfig::Graphs { graphs_dir }) => Some(graphs_dir.clone()),
        _ => None,
    };
    let backend = match args.backend {
        Some(BackendKind::Mock) => BackendConfig::Mock {
            seed: args.seed.or(file_seed).ok_or_else(|| anyhow!("the mock backend requires --seed"))?,
        },
        Some(BackendKind::Graphs) => BackendConfig::Graphs {
            graphs_dir: args.graphs_dir.or(file_graphs).unwrap_or_else(|| PathBuf::from("graphs")),
        },
        None => match (file.backend, args.seed, args.graphs_dir) {
            (Some(BackendConfig::Mock { .. }), Some(seed), _) => BackendConfig::Mock { seed },
            (Some(BackendConfig::Graphs { .. }), _, Some(graphs_dir)) => BackendConfig::Graphs { graphs_dir },
            (Some(b), _, _) => b,
            (None, Some(_), Some(_)) => bail!("--seed and --graphs-dir given without --backend"),
            (None, Some(seed), None) => BackendConfig::Mock { seed },
            (None, None, dir) => BackendConfig::Graphs { graphs_dir: dir.unwrap_or_else(|| PathBuf::from("graphs")) },
        },
    };

    let mut cfg = RunConfig::new(manifest, backend);
    if let Some(m) = args.models.or(file.models) {
        cfg.models = m;
    }
    if let Some(dir) = args
        .cache_dir
        .or(file.cache_dir)
        .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
    {
        cfg.cache_dir = dir;
    }
    if let Some(dir) = args.out_dir.or(file.out_dir) {
        cfg.out_dir = dir;
    }
    if let Some(p) = args.variance_pool {
        cfg.variance_pool = match p {
            PoolArg::OpOnly => VariancePool::OpOnly,
            PoolArg::AllPairs => VariancePool::AllPairs,
        };
    } else if let Some(p) = file.variance_pool {
        cfg.variance_pool = p;
    }
    if let Some(g) = args.gap_policy.or(file.gap_policy) {
        cfg.gap_policy = g;
    }
    cfg.jobs = args.jobs;
    Ok(cfg.normalized()?)
}

fn print_validation(report: &style_dashboard::corpus::ValidationReport) {
    println!("validated {} images in {} groups: {} failure(s)", report.images, report.groups, report.failures);
    for f in report.failed() {
        if let style_dashboard::corpus::FileStatus::Failed { reason } = &f.status {
            println!("  FAILED {} ({}): {reason}", f.path.display(), f.group_id);
        }
    }
}

fn print_report(cfg: &RunConfig, report: &style_dashboard::report::DashboardReport) -> Result<(), PipelineError> {
    let table = style_dashboard::report::render_summary_table(&report.summaries)?;
    print!("{}", table.to_text());
    if let Some(g) = &report.grade_alignment {
        println!(
            "mean style recognition {:.3} -> distance {:.3}; closest model {} (gap {:.3})",
            g.mean_style_recognition,
            g.mapped_distance,
            g.closest().model_id.display_name(),
            g.closest().gap
        );
    }
    println!("dashboard written to {}", cfg.out_dir.display());
    Ok(())
}

fn execute(command: Command) -> Result<i32, (i32, String)> {
    let (args, which) = match command {
        Command::Validate(a) => (a, "validate"),
        Command::Extract(a) => (a, "extract"),
        Command::Analyze(a) => (a, "analyze"),
        Command::Run(a) => (a, "run"),
    };
    let cfg = merge(args).map_err(|e| (2, format!("{e:#}")))?;
    let fail = |e: PipelineError| (e.exit_code(), e.to_string());
    par::with_jobs(cfg.jobs, || match which {
        "validate" => {
            let report = pipeline::cmd_validate(&cfg).map_err(fail)?;
            print_validation(&report);
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        "extract" => {
            let stats = pipeline::cmd_extract(&cfg).map_err(fail)?;
            println!("images={} computed={} reused={}", stats.images, stats.computed, stats.reused);
            Ok(0)
        }
        "analyze" => {
            let report = pipeline::cmd_analyze(&cfg).map_err(fail)?;
            print_report(&cfg, &report).map_err(fail)?;
            Ok(0)
        }
        _ => match pipeline::cmd_run(&cfg) {
            Ok(out) => {
                print_validation(&out.validation);
                println!("images={} computed={} reused={}", out.extract.images, out.extract.computed, out.extract.reused);
                print_report(&cfg, &out.report).map_err(fail)?;
                Ok(0)
            }
            Err(e) => {
                if let PipelineError::Stage { stage: "validate", .. } = &e {
                    if let Ok(text) = std::fs::read_to_string(cfg.out_dir.join(pipeline::VALIDATION_FILE)) {
                        eprintln!("see validation report:\n{text}");
                    }
                }
                Err(fail(e))
            }
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> RunArgs {
        let mut argv = vec!["style-dashboard", "run"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn gap_policy_flag() {
        assert_eq!(parse_gap_policy("median").unwrap(), GapPolicy::Median);
        assert_eq!(
            parse_gap_policy("absolute:0.463,0.063").unwrap(),
            GapPolicy::Absolute { dino_ref: 0.463, adain_ref: 0.063 }
        );
        assert!(parse_gap_policy("absolute:x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("cfg.json");
        std::fs::write(
            &file,
            r#"{"manifest_path":"m.json","models":["VGG19"],"backend":{"kind":"mock","seed":3},"variance_pool":"all_pairs"}"#,
        )
        .unwrap();
        let cfg = merge(args(&["--config", file.to_str().unwrap(), "--seed", "9", "--out-dir", "o"])).unwrap();
        assert_eq!(cfg.models, vec![ModelId::Vgg19]);
        assert_eq!(cfg.backend, BackendConfig::Mock { seed: 9 });
        assert_eq!(cfg.variance_pool, VariancePool::AllPairs);
        assert_eq!(cfg.out_dir, PathBuf::from("o"));
        assert_eq!(cfg.manifest_path, PathBuf::from("m.json"));
    }

    #[test]
    fn mock_needs_seed() {
        assert!(merge(args(&["--manifest", "m.json", "--backend", "mock"])).is_err());
        let cfg = merge(args(&["--manifest", "m.json", "--backend", "mock", "--seed", "1", "--models", "dinov2,ADAIN_STYLE"])).unwrap();
        assert_eq!(cfg.models, vec![ModelId::AdainStyle, ModelId::Dinov2]);
    }

    #[test]
    fn manifest_required() {
        assert!(merge(args(&["--backend", "mock", "--seed", "1"])).is_err());
    }
}
