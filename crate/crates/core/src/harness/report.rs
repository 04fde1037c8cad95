use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use super::suite::Summary;
use crate::error::{PgpuError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = PgpuError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(PgpuError::InvalidParameter(format!("unknown report format '{other}'"))),
        }
    }
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |a| format!("{:.2}", 100.0 * a))
}

/// Renders a summary as a table: one row per setting, one column per method,
/// accuracies in percent.
pub fn render_report(summary: &Summary, format: ReportFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(&summary.records)?;
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str("method,setting,accuracy_mean,accuracy_std,n_ok,n_failed\n");
            for r in &summary.records {
                let _ = writeln!(
                    out,
                    "{},\"{}\",{},{},{},{}",
                    r.method,
                    r.setting,
                    r.accuracy_mean.map_or(String::new(), |v| v.to_string()),
                    r.accuracy_std.map_or(String::new(), |v| v.to_string()),
                    r.per_split.len(),
                    r.failures.len()
                );
            }
        }
        ReportFormat::Markdown => {
            let mut methods: Vec<&str> = Vec::new();
            let mut settings: Vec<&str> = Vec::new();
            let mut seen = (BTreeSet::new(), BTreeSet::new());
            for r in &summary.records {
                if seen.0.insert(r.method.as_str()) {
                    methods.push(&r.method);
                }
                if seen.1.insert(r.setting.as_str()) {
                    settings.push(&r.setting);
                }
            }
            let _ = writeln!(out, "| setting | {} |", methods.join(" | "));
            let _ = writeln!(out, "|---|{}", "---|".repeat(methods.len()));
            for s in &settings {
                let cells: Vec<String> = methods
                    .iter()
                    .map(|m| {
                        summary
                            .records
                            .iter()
                            .find(|r| r.method == *m && r.setting == *s)
                            .map_or_else(String::new, |r| format!("{} ± {}", percent(r.accuracy_mean), percent(r.accuracy_std)))
                    })
                    .collect();
                let _ = writeln!(out, "| {s} | {} |", cells.join(" | "));
            }
        }
    }
    Ok(out)
}
