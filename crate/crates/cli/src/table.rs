//! CSV and markdown rendering of metric tables.

use irvis_core::metrics::{MetricsReport, METRIC_NAMES};

use crate::config::TableFormat;

/// A labelled list of metric rows in insertion order.
#[derive(Debug, Clone, Default)]
pub struct MetricTable {
    pub rows: Vec<(String, MetricsReport)>,
}

impl MetricTable {
    pub fn push(&mut self, label: impl Into<String>, report: MetricsReport) {
        self.rows.push((label.into(), report));
    }

    pub fn to_csv(&self) -> String {
        let mut out = MetricsReport::csv_header();
        out.push('\n');
        for (label, r) in &self.rows {
            out.push_str(&r.csv_row(label));
            out.push('\n');
        }
        out
    }

    /// Markdown table with values at four decimals; `preamble` lines come first.
    pub fn to_markdown(&self, preamble: &[String]) -> String {
        let mut out = String::new();
        for line in preamble {
            out.push_str(line);
            out.push('\n');
        }
        if !preamble.is_empty() {
            out.push('\n');
        }
        out.push_str("| path |");
        for name in METRIC_NAMES {
            out.push_str(&format!(" {} |", name.to_uppercase()));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(METRIC_NAMES.len()));
        out.push('\n');
        for (label, r) in &self.rows {
            out.push_str(&format!("| {label} |"));
            for v in r.values() {
                out.push_str(&format!(" {v:.4} |"));
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: TableFormat, preamble: &[String]) -> String {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Markdown => self.to_markdown(preamble),
        }
    }
}
