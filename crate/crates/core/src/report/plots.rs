use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::svg::{nice_ceiling, Svg, PALETTE};
use super::{fixed, ReportError};
use crate::metrics::{correlation_series, model_summary, CorrelationMatrix, GroupDistances, VariancePool};
use crate::model::ModelId;

const HIST_BINS: usize = 20;

/// Writes the bar chart, one histogram per model and one scatter panel per
/// model pair into `out_dir`. Returns the files in creation order.
pub fn emit_plots(
    distances: &[GroupDistances],
    correlations: &CorrelationMatrix,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    if distances.is_empty() {
        return Err(ReportError::EmptyInput("no distances to plot"));
    }
    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io { path: out_dir.to_path_buf(), source })?;
    let mut by_model: BTreeMap<ModelId, Vec<GroupDistances>> = BTreeMap::new();
    for d in distances {
        by_model.entry(d.model_id).or_default().push(d.clone());
    }

    let mut files = Vec::new();
    let mut write = |name: String, svg: String| -> Result<(), ReportError> {
        let path = out_dir.join(name);
        fs::write(&path, svg).map_err(|source| ReportError::Io { path: path.clone(), source })?;
        files.push(path);
        Ok(())
    };

    write("mean_distances.svg".into(), bar_chart(&by_model)?)?;
    for (model, groups) in &by_model {
        let values: Vec<f64> = groups.iter().flat_map(|g| g.to_original.iter().copied()).collect();
        write(format!("distribution_{}.svg", model.as_str().to_lowercase()), histogram(*model, &values))?;
    }
    let series = correlation_series(distances);
    for (a, b, r) in correlations.pairs() {
        let (Some(xs), Some(ys)) = (series.get(&a), series.get(&b)) else { continue };
        let xs: Vec<f64> = xs.iter().map(|(_, v)| *v).collect();
        let ys: Vec<f64> = ys.iter().map(|(_, v)| *v).collect();
        let name = format!("scatter_{}__{}.svg", a.as_str().to_lowercase(), b.as_str().to_lowercase());
        write(name, scatter(a, b, r, &xs, &ys))?;
    }
    Ok(files)
}

fn bar_chart(by_model: &BTreeMap<ModelId, Vec<GroupDistances>>) -> Result<String, ReportError> {
    let summaries = by_model
        .values()
        .map(|g| model_summary(g, VariancePool::OpOnly))
        .collect::<Result<Vec<_>, _>>()?;
    let n_op = summaries.iter().map(|s| s.mean_o_p.len()).max().unwrap_or(1);
    let mut labels: Vec<String> = (1..=n_op).map(|k| format!("Org→Pst{k}")).collect();
    labels.push(if n_op == 2 { "Pst1↔Pst2".into() } else { "Pst↔Pst".into() });
    let bars = labels.len();

    let (left, top, plot_h, group_w) = (60.0, 40.0, 300.0, 40.0 + 22.0 * bars as f64);
    let width = left + group_w * summaries.len() as f64 + 20.0;
    let height = top + plot_h + 80.0;
    let max = summaries
        .iter()
        .flat_map(|s| s.mean_o_p.iter().copied().chain(s.mean_p_p))
        .fold(0.0, f64::max);
    let ymax = nice_ceiling(max, 0.1);
    let y = |v: f64| top + plot_h * (1.0 - v / ymax);

    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 20.0, 14, "middle", "Mean cosine distance by model");
    svg.line(left, top, left, top + plot_h, "black");
    svg.line(left, top + plot_h, width - 10.0, top + plot_h, "black");
    for i in 0..=5 {
        let v = ymax * i as f64 / 5.0;
        svg.line(left - 4.0, y(v), left, y(v), "black");
        svg.text(left - 6.0, y(v) + 4.0, 10, "end", &fixed(v, 2));
    }
    for (gi, s) in summaries.iter().enumerate() {
        let gx = left + 10.0 + group_w * gi as f64;
        let mut values: Vec<Option<f64>> = (0..n_op).map(|k| s.mean_o_p.get(k).copied()).collect();
        values.push(s.mean_p_p);
        for (bi, v) in values.iter().enumerate() {
            if let Some(v) = v {
                svg.rect(gx + 22.0 * bi as f64, y(*v), 18.0, top + plot_h - y(*v), PALETTE[bi % PALETTE.len()]);
            }
        }
        svg.text(gx + 11.0 * bars as f64, top + plot_h + 16.0, 10, "middle", s.model_id.display_name());
    }
    for (bi, label) in labels.iter().enumerate() {
        let lx = left + 110.0 * bi as f64;
        svg.rect(lx, height - 30.0, 12.0, 12.0, PALETTE[bi % PALETTE.len()]);
        svg.text(lx + 16.0, height - 20.0, 10, "start", label);
    }
    Ok(svg.finish())
}

fn histogram(model: ModelId, values: &[f64]) -> String {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.05, hi + 0.05) };
    let bin_w = (hi - lo) / HIST_BINS as f64;
    let mut counts = [0usize; HIST_BINS];
    for &v in values {
        let b = (((v - lo) / bin_w) as usize).min(HIST_BINS - 1);
        counts[b] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;

    let (left, top, plot_w, plot_h) = (50.0, 40.0, 400.0, 220.0);
    let mut svg = Svg::new(left + plot_w + 20.0, top + plot_h + 50.0);
    svg.text(left + plot_w / 2.0, 20.0, 14, "middle", &format!("{} distance distribution", model.display_name()));
    svg.line(left, top, left, top + plot_h, "black");
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "black");
    let bar = plot_w / HIST_BINS as f64;
    for (i, &c) in counts.iter().enumerate() {
        let h = plot_h * c as f64 / peak;
        svg.rect(left + bar * i as f64 + 1.0, top + plot_h - h, bar - 2.0, h, PALETTE[model.index() % PALETTE.len()]);
    }
    svg.text(left, top + plot_h + 16.0, 10, "middle", &fixed(lo, 3));
    svg.text(left + plot_w, top + plot_h + 16.0, 10, "middle", &fixed(hi, 3));
    svg.text(left - 6.0, top + 4.0, 10, "end", &peak.to_string());
    svg.text(left + plot_w / 2.0, top + plot_h + 36.0, 11, "middle", "cosine distance (original to pastiche)");
    svg.finish()
}

fn scatter(a: ModelId, b: ModelId, r: f64, xs: &[f64], ys: &[f64]) -> String {
    let range = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi > lo { (lo, hi) } else { (lo - 0.05, hi + 0.05) }
    };
    let ((x0, x1), (y0, y1)) = (range(xs), range(ys));
    let (left, top, side) = (50.0, 40.0, 260.0);
    let px = |v: f64| left + side * (v - x0) / (x1 - x0);
    let py = |v: f64| top + side * (1.0 - (v - y0) / (y1 - y0));

    let mut svg = Svg::new(left + side + 20.0, top + side + 50.0);
    svg.text(left + side / 2.0, 20.0, 13, "middle", &format!("{} vs {}  (r = {})", a.display_name(), b.display_name(), fixed(r, 3)));
    svg.line(left, top, left, top + side, "black");
    svg.line(left, top + side, left + side, top + side, "black");
    for (&x, &y) in xs.iter().zip(ys) {
        svg.circle(px(x), py(y), 3.0, PALETTE[0]);
    }
    svg.text(left + side / 2.0, top + side + 36.0, 11, "middle", a.display_name());
    svg.text(left - 8.0, top + side / 2.0, 11, "end", b.display_name());
    svg.text(left, top + side + 16.0, 10, "middle", &fixed(x0, 3));
    svg.text(left + side, top + side + 16.0, 10, "middle", &fixed(x1, 3));
    svg.text(left - 4.0, top + side, 10, "end", &fixed(y0, 3));
    svg.text(left - 4.0, top + 8.0, 10, "end", &fixed(y1, 3));
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::correlation_matrix;
    use crate::par::Execution;

    fn corpus() -> Vec<GroupDistances> {
        let mut out = Vec::new();
        for g in 0..6 {
            for m in ModelId::ALL {
                let base = 0.1 * (m.index() + 1) as f64;
                let jitter = ((g * 7 + m.index() * 3) % 11) as f64 / 50.0;
                out.push(GroupDistances {
                    group_id: format!("g{g}"),
                    model_id: m,
                    to_original: vec![base + jitter, base + jitter / 2.0 + 0.01 * g as f64],
                    between_pastiches: vec![base],
                });
            }
        }
        out
    }

    #[test]
    fn counts_and_determinism() {
        let ds = corpus();
        let cm = correlation_matrix(&correlation_series(&ds), Execution::Parallel).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = emit_plots(&ds, &cm, a.path()).unwrap();
        let fb = emit_plots(&ds, &cm, b.path()).unwrap();
        assert_eq!(fa.len(), 1 + 5 + 10);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        let scatter = fs::read_to_string(a.path().join("scatter_dinov2__vgg19.svg")).unwrap();
        assert!(scatter.starts_with("<svg"));
        assert!(scatter.contains("(r = "));
    }

    #[test]
    fn empty_input_rejected() {
        let cm = CorrelationMatrix { model_ids: vec![], r: vec![], series_keys: vec![] };
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plots(&[], &cm, dir.path()), Err(ReportError::EmptyInput(_))));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
