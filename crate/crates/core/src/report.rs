//! Serialized run artifacts: JSON report, CSV tables, Markdown profiles.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::ClusterProfile;
use crate::metrics::MetricReport;
use crate::pipeline::{AlgorithmRun, PreparedData, RunSpec};

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub shots: Option<u64>,
    pub year: Option<i32>,
    pub kernel_measurement: crate::encode::KernelMeasurement,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub records: usize,
    pub rejected_rows: usize,
    pub features: Vec<String>,
    pub categories: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub algorithm: String,
    pub label: String,
    pub normalization: [f64; 2],
    pub selection: String,
    pub best_restart: usize,
    pub objective: f64,
    pub wcss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: Option<MetricReport>,
    pub metrics_note: Option<String>,
    pub cluster_sizes: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub profiles: Vec<ClusterProfile>,
}

/// Wall-clock data; the only part of a report that varies between
/// identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub timestamp: String,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub dataset: DatasetSummary,
    pub runs: Vec<RunEntry>,
    pub timing: Timing,
}

impl RunReport {
    pub fn build(
        command: &str,
        spec: &RunSpec,
        prep: &PreparedData,
        runs: &[AlgorithmRun],
        elapsed: Duration,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: ConfigEcho {
                input: spec.input.display().to_string(),
                algorithm: spec.algorithm.to_string(),
                k: spec.k,
                seed: spec.seed,
                restarts: spec.restarts,
                shots: spec.shots,
                year: spec.year,
                kernel_measurement: spec.kernel_measurement,
            },
            dataset: DatasetSummary {
                records: prep.records.len(),
                rejected_rows: prep.rejected,
                features: prep.encodings.iter().map(|e| e.column.clone()).collect(),
                categories: prep.encodings.iter().map(|e| e.len()).collect(),
            },
            runs: runs
                .iter()
                .map(|r| {
                    let range = r.algorithm.range();
                    RunEntry {
                        algorithm: r.algorithm.key().to_string(),
                        label: r.algorithm.label().to_string(),
                        normalization: [range.lo, range.hi],
                        selection: r.selection.to_string(),
                        best_restart: r.best_restart,
                        objective: r.objective,
                        wcss: r.wcss,
                        iterations: r.result.iterations,
                        converged: r.result.converged,
                        metrics: r.metrics,
                        metrics_note: r.metrics_note.clone(),
                        cluster_sizes: r.result.cluster_sizes(),
                        centroids: r.result.centroids.clone(),
                        assignments: r.result.assignments.clone(),
                        profiles: r.profiles.clone(),
                    }
                })
                .collect(),
            timing: Timing {
                timestamp: chrono::Utc::now().to_rfc3339(),
                wall_clock_ms: elapsed.as_millis(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

fn metric_cells(m: Option<&MetricReport>) -> [String; 3] {
    match m {
        Some(m) => [
            format!("{:.6}", m.silhouette),
            format!("{:.6}", m.davies_bouldin),
            format!("{:.6}", m.calinski_harabasz),
        ],
        None => [String::new(), String::new(), String::new()],
    }
}

pub fn metrics_csv(runs: &[AlgorithmRun]) -> String {
    let mut out =
        String::from("algorithm,label,silhouette,davies_bouldin,calinski_harabasz,k,m,wcss\n");
    for r in runs {
        let [s, db, ch] = metric_cells(r.metrics.as_ref());
        let _ = writeln!(
            out,
            "{},{},{s},{db},{ch},{},{},{:.6}",
            r.algorithm.key(),
            r.algorithm.label(),
            r.result.k(),
            r.result.assignments.len(),
            r.wcss
        );
    }
    out
}

const PROFILE_TOP: usize = 5;

fn top_list(items: &[(String, usize)]) -> String {
    items
        .iter()
        .take(PROFILE_TOP)
        .map(|(name, n)| format!("{} ({n})", name.replace('|', "\\|")))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn profiles_markdown(prep: &PreparedData, runs: &[AlgorithmRun]) -> String {
    let mut out = String::from("# Cluster profiles\n");
    let _ = writeln!(out, "\n{} records.", prep.records.len());
    for r in runs {
        let _ = writeln!(out, "\n## {}\n", r.algorithm.label());
        out.push_str("| cluster | size | top vendors | top products | severity |\n");
        out.push_str("|---|---|---|---|---|\n");
        for p in &r.profiles {
            let severity = p
                .severity_histogram
                .iter()
                .map(|(s, n)| format!("{s}: {n}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                p.cluster_id,
                p.size,
                top_list(&p.top_vendors),
                top_list(&p.top_products),
                severity
            );
        }
    }
    out
}

/// One row of the algorithm comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub silhouette: Option<f64>,
    pub davies_bouldin: Option<f64>,
    pub calinski_harabasz: Option<f64>,
    /// Best-in-column flags: silhouette (max), Davies–Bouldin (min),
    /// Calinski–Harabasz (max).
    pub best: [bool; 3],
}

/// Values are compared at the printed precision (three decimals), so rows
/// that print the same are all flagged.
fn flag_best(values: &[Option<f64>], higher_is_better: bool) -> Vec<bool> {
    let key = |v: f64| (v * 1000.0).round() as i64;
    let best = values.iter().flatten().map(|&v| key(v)).reduce(|a, b| {
        if higher_is_better {
            a.max(b)
        } else {
            a.min(b)
        }
    });
    values
        .iter()
        .map(|v| matches!((v, best), (Some(v), Some(b)) if key(*v) == b))
        .collect()
}

pub fn comparison_rows(runs: &[AlgorithmRun]) -> Vec<ComparisonRow> {
    let mut ordered: Vec<&AlgorithmRun> = runs.iter().collect();
    ordered.sort_by_key(|r| r.algorithm);
    let sil: Vec<Option<f64>> = ordered
        .iter()
        .map(|r| r.metrics.map(|m| m.silhouette))
        .collect();
    let db: Vec<Option<f64>> = ordered
        .iter()
        .map(|r| r.metrics.map(|m| m.davies_bouldin))
        .collect();
    let ch: Vec<Option<f64>> = ordered
        .iter()
        .map(|r| r.metrics.map(|m| m.calinski_harabasz))
        .collect();
    let (bs, bd, bc) = (
        flag_best(&sil, true),
        flag_best(&db, false),
        flag_best(&ch, true),
    );
    ordered
        .iter()
        .enumerate()
        .map(|(i, r)| ComparisonRow {
            algorithm: r.algorithm.label().to_string(),
            silhouette: sil[i],
            davies_bouldin: db[i],
            calinski_harabasz: ch[i],
            best: [bs[i], bd[i], bc[i]],
        })
        .collect()
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "algorithm,silhouette,davies_bouldin,calinski_harabasz,best_silhouette,best_davies_bouldin,best_calinski_harabasz\n",
    );
    let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            cell(r.silhouette),
            cell(r.davies_bouldin),
            cell(r.calinski_harabasz),
            r.best[0],
            r.best[1],
            r.best[2]
        );
    }
    out
}

/// Fixed-width table; best values are marked with `*`.
pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let cell = |v: Option<f64>, best: bool| match v {
        Some(v) => format!("{v:.3}{}", if best { "*" } else { " " }),
        None => "n/a ".to_string(),
    };
    let mut out = format!(
        "{:<22} {:>12} {:>16} {:>19}\n",
        "Algorithm", "Silhouette ↑", "Davies-Bouldin ↓", "Calinski-Harabasz ↑"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<22} {:>12} {:>16} {:>19}",
            r.algorithm,
            cell(r.silhouette, r.best[0]),
            cell(r.davies_bouldin, r.best[1]),
            cell(r.calinski_harabasz, r.best[2])
        );
    }
    out
}

pub fn elbow_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("k,wcss\n");
    for (k, w) in curve {
        let _ = writeln!(out, "{k},{w:.9}");
    }
    out
}

/// Writes every file to a temporary sibling first and renames them into
/// place only once all contents are on disk.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let mut tmp = tempfile::Builder::new()
            .prefix(&format!(".{name}."))
            .tempfile_in(dir)
            .map_err(|e| Error::io(dir, e))?;
        tmp.write_all(bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| Error::io(tmp.path(), e))?;
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        tmp.persist(&target)
            .map_err(|e| Error::io(&target, e.error))?;
        written.push(target);
    }
    Ok(written)
}
