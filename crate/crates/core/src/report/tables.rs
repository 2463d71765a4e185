use std::fmt::Write as _;

use super::{fixed, ReportError};
use crate::metrics::{CorrelationMatrix, ModelSummary};
use crate::model::ModelId;

const DECIMALS: usize = 3;
/// Variances sit an order of magnitude below the distances.
const VARIANCE_DECIMALS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model_id: ModelId,
    /// Org→Pst1 … Org→PstN, Average, Pst↔Pst; `None` renders empty.
    pub values: Vec<Option<f64>>,
    /// Parallel to `values`: the row holds that column's minimum.
    pub lowest: Vec<bool>,
}

/// Mean distance table, rows ascending by average distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    /// CSV column ids for the value columns.
    pub columns: Vec<String>,
    /// Display headers for the value columns.
    pub headers: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

fn cell(v: Option<f64>, places: usize) -> String {
    v.map(|x| fixed(x, places)).unwrap_or_default()
}

pub fn render_summary_table(summaries: &[ModelSummary]) -> Result<SummaryTable, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::EmptyInput("no model summaries"));
    }
    for s in summaries {
        let expected = s.expected_average();
        if s.average != expected {
            return Err(ReportError::AverageMismatch { model: s.model_id, average: s.average, expected });
        }
    }
    let n = summaries.iter().map(|s| s.mean_o_p.len()).max().unwrap_or(0);
    let mut columns: Vec<String> = (1..=n).map(|k| format!("org_pst{k}")).collect();
    let mut headers: Vec<String> = (1..=n).map(|k| format!("Org→Pst{k}")).collect();
    columns.push("average".into());
    headers.push("Average".into());
    if n == 2 {
        columns.push("pst1_pst2".into());
        headers.push("Pst1↔Pst2".into());
    } else {
        columns.push("pst_pst".into());
        headers.push("Pst↔Pst".into());
    }

    let mut ordered: Vec<&ModelSummary> = summaries.iter().collect();
    ordered.sort_by(|a, b| a.average.total_cmp(&b.average).then(a.model_id.cmp(&b.model_id)));
    let mut rows: Vec<SummaryRow> = ordered
        .iter()
        .map(|s| {
            let mut values: Vec<Option<f64>> = (0..n).map(|k| s.mean_o_p.get(k).copied()).collect();
            values.push(Some(s.average));
            values.push(s.mean_p_p);
            SummaryRow { model_id: s.model_id, lowest: vec![false; values.len()], values }
        })
        .collect();
    for c in 0..columns.len() {
        let min = rows.iter().filter_map(|r| r.values[c]).min_by(f64::total_cmp);
        if let Some(min) = min {
            for r in &mut rows {
                r.lowest[c] = r.values[c] == Some(min);
            }
        }
    }
    Ok(SummaryTable { columns, headers, rows })
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("model,{},lowest\n", self.columns.join(","));
        for r in &self.rows {
            let vals: Vec<String> = r.values.iter().map(|v| cell(*v, DECIMALS)).collect();
            let lowest: Vec<&str> = self
                .columns
                .iter()
                .zip(&r.lowest)
                .filter(|(_, &l)| l)
                .map(|(c, _)| c.as_str())
                .collect();
            let _ = writeln!(out, "{},{},{}", r.model_id, vals.join(","), lowest.join(";"));
        }
        out
    }

    /// Aligned plain-text rendering; `*` marks each column's lowest value.
    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("Model".to_string()).chain(self.headers.clone()).collect()];
        for r in &self.rows {
            let mut line = vec![r.model_id.display_name().to_string()];
            for (v, &low) in r.values.iter().zip(&r.lowest) {
                let mut s = cell(*v, DECIMALS);
                if low {
                    s.push('*');
                }
                line.push(s);
            }
            grid.push(line);
        }
        let mut out = align(&grid);
        out.push_str("* lowest value in column (higher similarity)\n");
        out
    }
}

fn align(grid: &[Vec<String>]) -> String {
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| grid.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in grid {
        let mut line = String::new();
        for (c, s) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(s);
            line.extend(std::iter::repeat(' ').take(widths[c] - s.chars().count()));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationRow {
    pub model_id: ModelId,
    pub variance: f64,
    pub discrimination: &'static str,
    pub consistency: Option<f64>,
    pub consistency_label: &'static str,
}

/// Variance and pastiche consistency, rows descending by variance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationTable {
    pub rows: Vec<DiscriminationRow>,
}

pub fn render_discrimination_table(summaries: &[ModelSummary]) -> Result<DiscriminationTable, ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::EmptyInput("no model summaries"));
    }
    let mut ordered: Vec<&ModelSummary> = summaries.iter().collect();
    ordered.sort_by(|a, b| b.variance.total_cmp(&a.variance).then(a.model_id.cmp(&b.model_id)));
    let mut rows: Vec<DiscriminationRow> = ordered
        .iter()
        .map(|s| DiscriminationRow {
            model_id: s.model_id,
            variance: s.variance,
            discrimination: "",
            consistency: s.consistency,
            consistency_label: "",
        })
        .collect();

    let last = rows.len() - 1;
    if rows[0].variance != rows[last].variance {
        rows[0].discrimination = "Most Discriminative";
        rows[last].discrimination = "Least Discriminative";
    }
    // lowest mean difference = most consistent; first row in table order wins ties
    let pick = |better: fn(f64, f64) -> bool| {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in rows.iter().enumerate() {
            if let Some(c) = r.consistency {
                if best.map_or(true, |(_, b)| better(c, b)) {
                    best = Some((i, c));
                }
            }
        }
        best
    };
    if let (Some((lo, lo_v)), Some((hi, hi_v))) = (pick(|c, b| c < b), pick(|c, b| c > b)) {
        if lo_v != hi_v {
            rows[lo].consistency_label = "Most Consistent";
            rows[hi].consistency_label = "Most Variable";
        }
    }
    Ok(DiscriminationTable { rows })
}

impl DiscriminationTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,variance,discrimination,consistency,consistency_label\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.model_id,
                fixed(r.variance, VARIANCE_DECIMALS),
                r.discrimination,
                cell(r.consistency, DECIMALS),
                r.consistency_label
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut grid = vec![vec![
            "Model".to_string(),
            "Variance".into(),
            "Discrimination".into(),
            "Avg. Diff.".into(),
            "Consistency".into(),
        ]];
        for r in &self.rows {
            grid.push(vec![
                r.model_id.display_name().into(),
                fixed(r.variance, VARIANCE_DECIMALS),
                r.discrimination.into(),
                cell(r.consistency, DECIMALS),
                r.consistency_label.into(),
            ]);
        }
        align(&grid)
    }
}

/// Square matrix with model ids as header row and first column.
pub fn render_correlations_csv(m: &CorrelationMatrix) -> String {
    let ids: Vec<&str> = m.model_ids.iter().map(|id| id.as_str()).collect();
    let mut out = format!("model,{}\n", ids.join(","));
    for (id, row) in ids.iter().zip(&m.r) {
        let vals: Vec<String> = row.iter().map(|v| fixed(*v, DECIMALS)).collect();
        let _ = writeln!(out, "{id},{}", vals.join(","));
    }
    out
}
