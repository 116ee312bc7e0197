//! Descriptive statistics, missingness summaries and scatter exports.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frame::{CalendarDate, ObservationFrame};

/// Summary of one column's observed cells. `None` marks an undefined value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub p25: Option<f64>,
    pub p50: Option<f64>,
    pub p75: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub columns: IndexMap<String, ColumnStats>,
}

/// Quantile of sorted data by linear interpolation between closest ranks.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn column_stats(values: &[f64]) -> ColumnStats {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
    let std = mean.filter(|_| n > 1).map(|m| {
        let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    ColumnStats {
        count: n,
        mean,
        std,
        min: sorted.first().copied(),
        p25: quantile_sorted(&sorted, 0.25),
        p50: quantile_sorted(&sorted, 0.5),
        p75: quantile_sorted(&sorted, 0.75),
        max: sorted.last().copied(),
    }
}

pub fn descriptive_stats(frame: &ObservationFrame) -> DescriptiveStats {
    DescriptiveStats {
        columns: frame
            .columns()
            .map(|(name, series)| (name.to_string(), column_stats(&series.observed_values())))
            .collect(),
    }
}

type StatGetter = fn(&ColumnStats) -> Option<f64>;

impl DescriptiveStats {
    /// Aligned table with one column per variable, three decimals.
    pub fn render(&self) -> String {
        let names: Vec<&String> = self.columns.keys().collect();
        let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(10);
        let mut out = format!("{:<6}", "");
        for name in &names {
            let _ = write!(out, "  {name:>width$}");
        }
        out.push('\n');
        let rows: [(&str, StatGetter); 8] = [
            ("count", |s| Some(s.count as f64)),
            ("mean", |s| s.mean),
            ("std", |s| s.std),
            ("min", |s| s.min),
            ("25%", |s| s.p25),
            ("50%", |s| s.p50),
            ("75%", |s| s.p75),
            ("max", |s| s.max),
        ];
        for (label, get) in rows {
            let _ = write!(out, "{label:<6}");
            for stats in self.columns.values() {
                match get(stats) {
                    Some(v) => {
                        let _ = write!(out, "  {v:>width$.3}");
                    }
                    None => {
                        let _ = write!(out, "  {:>width$}", "NA");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMissingness {
    pub observed: usize,
    pub missing: usize,
    pub missing_fraction: f64,
    /// Per-date observation bitmap as a string of `1`/`0`.
    pub bitmap: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessSummary {
    pub rows: usize,
    pub columns: IndexMap<String, ColumnMissingness>,
}

pub fn missingness_summary(frame: &ObservationFrame) -> MissingnessSummary {
    let rows = frame.n_rows();
    let columns = frame
        .columns()
        .map(|(name, series)| {
            let observed = series.observed_count();
            let missing = rows - observed;
            let entry = ColumnMissingness {
                observed,
                missing,
                missing_fraction: if rows == 0 { 0.0 } else { missing as f64 / rows as f64 },
                bitmap: series.mask().iter().map(|&o| if o { '1' } else { '0' }).collect(),
            };
            (name.to_string(), entry)
        })
        .collect();
    MissingnessSummary { rows, columns }
}

impl MissingnessSummary {
    pub fn render(&self) -> String {
        let width = self.columns.keys().map(String::len).max().unwrap_or(0).max(6);
        let mut out = format!("{:<width$}  {:>8}  {:>8}  {:>8}\n", "column", "observed", "missing", "fraction");
        for (name, m) in &self.columns {
            let _ = writeln!(out, "{name:<width$}  {:>8}  {:>8}  {:>8.3}", m.observed, m.missing, m.missing_fraction);
        }
        out
    }
}

/// Observed `(date, value)` points of one column, date-ascending.
pub fn scatter_export(frame: &ObservationFrame, column: &str) -> Result<Vec<(CalendarDate, f64)>> {
    let series = frame.column(column)?;
    Ok(frame.dates().iter().zip(series.iter()).filter_map(|(d, v)| v.map(|v| (*d, v))).collect())
}

/// Scatter points as `date,value` CSV text.
pub fn scatter_csv(points: &[(CalendarDate, f64)], column: &str) -> String {
    let mut out = format!("date,{column}\n");
    for (d, v) in points {
        let _ = writeln!(out, "{d},{v}");
    }
    out
}
