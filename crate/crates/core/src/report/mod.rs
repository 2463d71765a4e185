//! Dashboard rendering: CSV and text tables, SVG plots and canonical JSON.

mod dashboard;
mod plots;
mod svg;
mod tables;

use std::path::PathBuf;

pub use dashboard::{canonical_json, emit_dashboard_json, DashboardReport};
pub use plots::emit_plots;
pub use tables::{
    render_correlations_csv, render_discrimination_table, render_summary_table, DiscriminationRow,
    DiscriminationTable, SummaryRow, SummaryTable,
};

use crate::metrics::MetricsError;
use crate::model::ModelId;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("nothing to render: {0}")]
    EmptyInput(&'static str),
    #[error("{model}: average {average} is not the mean of its column means ({expected})")]
    AverageMismatch { model: ModelId, average: f64, expected: f64 },
    #[error("cannot serialize dashboard: {0}")]
    Serialize(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Fixed-point rendering; ties on the exact binary value round half to even.
pub(crate) fn fixed(x: f64, places: usize) -> String {
    format!("{x:.places$}")
}
