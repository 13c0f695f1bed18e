use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::run::ExperimentRecord;
use crate::numcore::summarize;
use crate::{Metrics, Result, Summary};

/// Metric columns reported per method, with the direction of improvement.
pub const METRICS: [(&str, bool); 6] = [
    ("inverse_rmse", false),
    ("inverse_r2", true),
    ("inverse_nmae", false),
    ("forward_rmse", false),
    ("forward_r2", true),
    ("forward_nmae", false),
];

fn metric_value(r: &ExperimentRecord, metric: &str) -> Option<f64> {
    let (group, name) = metric.split_once('_')?;
    let m: &Metrics = match group {
        "inverse" => r.inverse_metrics.as_ref()?,
        "forward" => r.forward_metrics.as_ref()?,
        _ => return None,
    };
    match name {
        "rmse" => Some(m.rmse),
        "r2" => Some(m.r2),
        "nmae" => Some(m.nmae),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub metric: String,
    /// `None` when no successful run reports this metric.
    pub stats: Option<Summary>,
    pub n_ok: usize,
    pub n_failed: usize,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

/// Aggregates records per method and metric. Methods appear in first-seen
/// order. For every metric the method with the best mean is flagged; ties go
/// to the alphabetically first method name.
pub fn summarize_experiment(records: &[ExperimentRecord]) -> Result<SummaryTable> {
    let mut methods: Vec<Method> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut rows = Vec::new();
    for &(metric, higher_better) in &METRICS {
        let start = rows.len();
        for &m in &methods {
            let of_method: Vec<&ExperimentRecord> =
                records.iter().filter(|r| r.method == m).collect();
            let n_failed = of_method.iter().filter(|r| !r.is_ok()).count();
            let values: Vec<f64> = of_method
                .iter()
                .filter(|r| r.is_ok())
                .filter_map(|r| metric_value(r, metric))
                .collect();
            let stats = if values.is_empty() {
                None
            } else {
                Some(summarize(&values)?)
            };
            rows.push(SummaryRow {
                method: m,
                metric: metric.to_owned(),
                stats,
                n_ok: values.len(),
                n_failed,
                best: false,
            });
        }
        let best = rows[start..]
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.stats.map(|s| (i, s.mean, r.method.name())))
            .min_by(|a, b| {
                let ord = if higher_better {
                    b.1.total_cmp(&a.1)
                } else {
                    a.1.total_cmp(&b.1)
                };
                match ord {
                    Ordering::Equal => a.2.cmp(b.2),
                    o => o,
                }
            });
        if let Some((i, _, _)) = best {
            rows[start + i].best = true;
        }
    }
    // Present grouped by method, metrics in fixed order.
    rows.sort_by_key(|r| {
        let mi = methods
            .iter()
            .position(|&m| m == r.method)
            .unwrap_or(usize::MAX);
        let ki = METRICS
            .iter()
            .position(|(k, _)| *k == r.metric)
            .unwrap_or(usize::MAX);
        (mi, ki)
    });
    Ok(SummaryTable { rows })
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |v| format!("{v}"))
}

impl SummaryTable {
    pub fn row(&self, method: Method, metric: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,metric,mean,std,max,min,n_ok,n_failed,best\n");
        for r in &self.rows {
            let s = r.stats;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.method,
                r.metric,
                num(s.map(|s| s.mean)),
                num(s.map(|s| s.std)),
                num(s.map(|s| s.max)),
                num(s.map(|s| s.min)),
                r.n_ok,
                r.n_failed,
                r.best
            );
        }
        out
    }

    /// One line per method and inverse metric comparing its mean against
    /// the baseline method (by default LHS).
    pub fn comparison_lines(&self, baseline: Method) -> Vec<String> {
        let mut lines = Vec::new();
        let mut methods: Vec<Method> = Vec::new();
        for r in &self.rows {
            if r.method != baseline && !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        for m in methods {
            for &(metric, higher_better) in METRICS.iter().filter(|(k, _)| k.starts_with("inverse"))
            {
                let a = self.row(m, metric).and_then(|r| r.stats);
                let b = self.row(baseline, metric).and_then(|r| r.stats);
                let verdict = match (a, b) {
                    (Some(a), Some(b)) => {
                        let better = if higher_better {
                            a.mean > b.mean
                        } else {
                            a.mean < b.mean
                        };
                        let tag = if a.mean == b.mean {
                            "equal"
                        } else if better {
                            "better"
                        } else {
                            "worse"
                        };
                        format!("{:.6} vs {:.6} ({tag})", a.mean, b.mean)
                    }
                    _ => "unavailable".to_owned(),
                };
                lines.push(format!("{m} vs {baseline} {metric}: {verdict}"));
            }
        }
        lines
    }
}

/// Per-run metric table for box plots: one row per (method, repetition).
pub fn boxplot_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("method,repetition,seed,status");
    for (k, _) in METRICS {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{},{}", r.method, r.repetition, r.seed, r.status);
        for (k, _) in METRICS {
            let v = if r.is_ok() { metric_value(r, k) } else { None };
            let _ = write!(out, ",{}", num(v));
        }
        out.push('\n');
    }
    out
}
