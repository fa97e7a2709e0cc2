//! Rendering metric rows as CSV or an aligned text table, in percent with
//! two decimals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{EvalError, MetricsRow};

pub const CSV_HEADER: &str = "model,precision,recall,f1,auc,gmean";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Table,
}

/// How a fraction becomes a two-decimal percentage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Drop digits past the second decimal (the published tables read this way).
    #[default]
    Truncate,
    HalfUp,
}

/// `0.8547` -> `"85.47"`.
pub fn percent(value: f64, rounding: Rounding) -> String {
    // value in hundredths of a percent; the epsilon absorbs binary
    // representation error such as 0.8547 * 1e4 = 8546.999...
    let scaled = value * 10_000.0 + 1e-6;
    let hundredths = match rounding {
        Rounding::Truncate => libm::floor(scaled),
        Rounding::HalfUp => libm::floor(scaled + 0.5),
    } as i64;
    let sign = if hundredths < 0 { "-" } else { "" };
    let h = hundredths.unsigned_abs();
    format!("{sign}{}.{:02}", h / 100, h % 100)
}

const METRICS: [&str; 5] = ["precision", "recall", "f1", "auc", "gmean"];

fn values(row: &MetricsRow) -> [Option<f64>; 5] {
    [Some(row.precision), Some(row.recall), Some(row.f1), row.auc, Some(row.gmean)]
}

/// For each metric, which rows hold the best rendered value.
pub fn best_flags(rows: &[MetricsRow], rounding: Rounding) -> Vec<[bool; 5]> {
    let mut best = [i64::MIN; 5];
    let key = |v: f64| -> i64 {
        let s = percent(v, rounding);
        s.replace('.', "").parse().unwrap_or(i64::MIN)
    };
    for r in rows {
        for (m, v) in values(r).iter().enumerate() {
            if let Some(v) = v {
                best[m] = best[m].max(key(*v));
            }
        }
    }
    rows.iter()
        .map(|r| {
            let vs = values(r);
            core::array::from_fn(|m| vs[m].is_some_and(|v| key(v) == best[m]))
        })
        .collect()
}

fn cell(v: Option<f64>, rounding: Rounding) -> String {
    v.map(|v| percent(v, rounding)).unwrap_or_else(|| String::from("n/a"))
}

pub fn render_report(
    rows: &[MetricsRow],
    format: ReportFormat,
    rounding: Rounding,
) -> Result<String, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let flags = best_flags(rows, rounding);
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&r.model_name);
                for v in values(r) {
                    out.push(',');
                    out.push_str(&cell(v, rounding));
                }
                out.push('\n');
            }
            out.push_str("# best:");
            for (m, name) in METRICS.iter().enumerate() {
                let winners: Vec<&str> = rows
                    .iter()
                    .zip(&flags)
                    .filter(|(_, f)| f[m])
                    .map(|(r, _)| r.model_name.as_str())
                    .collect();
                let _ = write!(out, " {name}={}", winners.join("|"));
            }
            out.push('\n');
        }
        ReportFormat::Table => {
            let name_w = rows.iter().map(|r| r.model_name.len()).max().unwrap_or(0).max(5);
            let _ = write!(out, "{:<name_w$}", "Model");
            for h in ["Precision", "Recall", "F1", "AUC", "G-mean"] {
                let _ = write!(out, "  {h:>10}");
            }
            out.push('\n');
            for (r, f) in rows.iter().zip(&flags) {
                let _ = write!(out, "{:<name_w$}", r.model_name);
                for (m, v) in values(r).iter().enumerate() {
                    let mut c = cell(*v, rounding);
                    if f[m] {
                        c.push('*');
                    } else {
                        c.push(' ');
                    }
                    let _ = write!(out, "  {c:>10}");
                }
                out.push('\n');
            }
            out.push_str("* best value per column\n");
        }
    }
    Ok(out)
}
