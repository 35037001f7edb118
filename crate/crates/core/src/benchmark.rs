//! Average feature and path reduction over many instances for each
//! combination of reduction techniques.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::mix_seed;
use crate::pipeline::{reduce, PipelineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Toggles {
    pub association_rules: bool,
    pub clustering: bool,
    pub random: bool,
}

impl Toggles {
    pub const fn new(association_rules: bool, clustering: bool, random: bool) -> Self {
        Toggles {
            association_rules,
            clustering,
            random,
        }
    }
}

impl fmt::Display for Toggles {
    /// `1`/`0` per technique: association rules, clustering, random.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |b: bool| if b { '1' } else { '0' };
        write!(f, "{}{}{}", bit(self.association_rules), bit(self.clustering), bit(self.random))
    }
}

/// The technique combinations reported, in output order.
pub const TABLE_ROWS: [Toggles; 7] = [
    Toggles::new(true, true, true),
    Toggles::new(false, true, true),
    Toggles::new(true, false, true),
    Toggles::new(true, true, false),
    Toggles::new(true, false, false),
    Toggles::new(false, true, false),
    Toggles::new(false, false, true),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub toggles: Toggles,
    /// Fractions in `[0, 1]`; standard deviations are population values.
    pub feature_mean: f64,
    pub feature_std: f64,
    pub path_mean: f64,
    pub path_std: f64,
    pub instances: usize,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every toggle row over every (scaled) instance. Instance `i` uses seed
/// `mix_seed(base.seed, i)` so results do not depend on the worker count.
pub fn run_benchmark(
    forest: &Forest,
    instances: &[Vec<f64>],
    base: &PipelineConfig,
    rows: &[Toggles],
    workers: Option<usize>,
) -> Result<Vec<BenchmarkRow>> {
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidParameter("workers must be >= 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    rows.iter()
        .map(|&t| {
            let results: Vec<(f64, f64)> = pool.install(|| {
                instances
                    .par_iter()
                    .enumerate()
                    .map(|(i, values)| {
                        let cfg = PipelineConfig {
                            seed: mix_seed(base.seed, i as u64),
                            ..base.clone().with_toggles(t.association_rules, t.clustering, t.random)
                        };
                        reduce(forest, values, &cfg)
                            .map(|r| (r.report.feature_reduction, r.report.path_reduction))
                    })
                    .collect::<Result<_>>()
            })?;
            let (feature_mean, feature_std) = mean_std(&results.iter().map(|r| r.0).collect::<Vec<_>>());
            let (path_mean, path_std) = mean_std(&results.iter().map(|r| r.1).collect::<Vec<_>>());
            Ok(BenchmarkRow {
                toggles: t,
                feature_mean,
                feature_std,
                path_mean,
                path_std,
                instances: results.len(),
            })
        })
        .collect()
}

/// Aligned text table with percentages.
pub fn format_table(rows: &[BenchmarkRow]) -> String {
    let header = ["AR", "CL", "RS", "feature reduction %", "path reduction %", "n"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            let b = |x: bool| if x { "x" } else { "-" }.to_string();
            [
                b(r.toggles.association_rules),
                b(r.toggles.clustering),
                b(r.toggles.random),
                format!("{:.2} \u{b1} {:.2}", 100.0 * r.feature_mean, 100.0 * r.feature_std),
                format!("{:.2} \u{b1} {:.2}", 100.0 * r.path_mean, 100.0 * r.path_std),
                r.instances.to_string(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| -> String {
        items
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn to_csv(rows: &[BenchmarkRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "association_rules",
        "clustering",
        "random",
        "feature_reduction_mean",
        "feature_reduction_std",
        "path_reduction_mean",
        "path_reduction_std",
        "instances",
    ])
    .expect("in-memory write");
    for r in rows {
        let b = |x: bool| if x { "1" } else { "0" }.to_string();
        w.write_record([
            b(r.toggles.association_rules),
            b(r.toggles.clustering),
            b(r.toggles.random),
            format!("{:.6}", r.feature_mean),
            format!("{:.6}", r.feature_std),
            format!("{:.6}", r.path_mean),
            format!("{:.6}", r.path_std),
            r.instances.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
