//! End-to-end runs: catalog CSV in, clusterings, metrics and profiles out.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::{
    elbow_curve, elbow_point, kmeans_best_of, spectral_cluster, update_step, wcss,
    ClusteringResult, DistanceMeasure, KMeansConfig, SpectralConfig,
};
use crate::dataset::{Dataset, NormalizationRange};
use crate::encode::{FidelityMode, KernelMeasurement};
use crate::error::{Error, Result};
use crate::ingest::{
    cluster_profile, filter_year, label_encode, min_max_normalize, parse_kev_csv, ClusterProfile,
    Column, LabelEncoding, VulnRecord,
};
use crate::metrics::{evaluate, MetricReport};
use crate::report;

/// Tolerance for recomputed metrics to agree with the stored ones.
pub const REPORT_CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Kmeans,
    Spectral,
    QcswapKmeans,
    QkernelKmeans,
}

impl Algorithm {
    /// Row order of the comparison table.
    pub const TABLE_ORDER: [Algorithm; 4] = [
        Algorithm::Kmeans,
        Algorithm::Spectral,
        Algorithm::QcswapKmeans,
        Algorithm::QkernelKmeans,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::Spectral => "spectral",
            Algorithm::QcswapKmeans => "qcswap_kmeans",
            Algorithm::QkernelKmeans => "qkernel_kmeans",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "K-means",
            Algorithm::Spectral => "Spectral Clustering",
            Algorithm::QcswapKmeans => "QCSWAPK-means",
            Algorithm::QkernelKmeans => "QkernelK-means",
        }
    }

    /// Feature range the algorithm runs on.
    pub fn range(self) -> NormalizationRange {
        match self {
            Algorithm::Kmeans | Algorithm::Spectral => NormalizationRange::UNIT,
            Algorithm::QcswapKmeans | Algorithm::QkernelKmeans => NormalizationRange::ANGLE,
        }
    }

    pub fn measure(self) -> Option<DistanceMeasure> {
        match self {
            Algorithm::Kmeans => Some(DistanceMeasure::Euclidean),
            Algorithm::Spectral => None,
            Algorithm::QcswapKmeans => Some(DistanceMeasure::SwapTest),
            Algorithm::QkernelKmeans => Some(DistanceMeasure::QuantumKernel),
        }
    }

    pub fn is_quantum(self) -> bool {
        self.measure().is_some_and(DistanceMeasure::is_quantum)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A single algorithm or all four.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    One(Algorithm),
    All,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::One(a) => vec![a],
            AlgorithmChoice::All => Algorithm::TABLE_ORDER.to_vec(),
        }
    }
}

impl FromStr for AlgorithmChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(AlgorithmChoice::All);
        }
        Algorithm::TABLE_ORDER
            .into_iter()
            .find(|a| a.key() == s)
            .map(AlgorithmChoice::One)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown algorithm '{s}' (expected kmeans, spectral, qcswap_kmeans, qkernel_kmeans or all)"
                ))
            })
    }
}

impl fmt::Display for AlgorithmChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmChoice::One(a) => f.write_str(a.key()),
            AlgorithmChoice::All => f.write_str("all"),
        }
    }
}

pub fn parse_kernel_measurement(s: &str) -> Result<KernelMeasurement> {
    match s {
        "all_zeros" => Ok(KernelMeasurement::AllZeros),
        "first_qubit" => Ok(KernelMeasurement::FirstQubit),
        other => Err(Error::Usage(format!(
            "unknown kernel measurement '{other}' (expected all_zeros or first_qubit)"
        ))),
    }
}

/// Everything a pipeline command needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub input: PathBuf,
    pub algorithm: AlgorithmChoice,
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    /// `None` evaluates circuits exactly.
    pub shots: Option<u64>,
    pub output_dir: PathBuf,
    /// Keep only records added in this calendar year; `None` keeps all.
    pub year: Option<i32>,
    pub kernel_measurement: KernelMeasurement,
    pub k_min: usize,
    pub k_max: usize,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            algorithm: AlgorithmChoice::All,
            k: 4,
            seed: 0,
            restarts: 10,
            shots: None,
            output_dir: PathBuf::from("out"),
            year: Some(2022),
            kernel_measurement: KernelMeasurement::AllZeros,
            k_min: 1,
            k_max: 10,
        }
    }
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(Error::Usage("no input file given".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn fidelity_mode(&self) -> FidelityMode {
        match self.shots {
            None => FidelityMode::Exact,
            Some(shots) => FidelityMode::Sampled {
                shots,
                seed: self.seed,
            },
        }
    }
}

/// Optional key-value configuration file. Every key mirrors a CLI flag.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub algorithm: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub shots: Option<u64>,
    /// A calendar year, or `0` to keep every year.
    pub year: Option<i32>,
    pub out: Option<PathBuf>,
    pub kernel_measurement: Option<String>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn apply(&self, spec: &mut RunSpec) -> Result<()> {
        if let Some(v) = &self.input {
            spec.input = v.clone();
        }
        if let Some(v) = &self.algorithm {
            spec.algorithm = v.parse()?;
        }
        if let Some(v) = self.k {
            spec.k = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.restarts {
            spec.restarts = v;
        }
        if let Some(v) = self.shots {
            spec.shots = Some(v);
        }
        if let Some(v) = self.year {
            spec.year = (v != 0).then_some(v);
        }
        if let Some(v) = &self.out {
            spec.output_dir = v.clone();
        }
        if let Some(v) = &self.kernel_measurement {
            spec.kernel_measurement = parse_kernel_measurement(v)?;
        }
        if let Some(v) = self.k_min {
            spec.k_min = v;
        }
        if let Some(v) = self.k_max {
            spec.k_max = v;
        }
        Ok(())
    }
}

/// Parsed, filtered and encoded catalog.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub records: Vec<VulnRecord>,
    pub rejected: usize,
    pub encodings: Vec<LabelEncoding>,
    /// Label codes, one column per encoded field.
    pub codes: Dataset,
    /// Codes scaled to `[0, 1]`.
    pub unit: Dataset,
    /// Codes scaled to `[0, pi]`.
    pub angle: Dataset,
}

impl PreparedData {
    pub fn features(&self, algorithm: Algorithm) -> &Dataset {
        if algorithm.range() == NormalizationRange::ANGLE {
            &self.angle
        } else {
            &self.unit
        }
    }
}

/// The two clustering features: vendor/project and product.
pub const FEATURE_COLUMNS: [Column; 2] = [Column::VendorProject, Column::Product];

pub fn prepare_records(records: Vec<VulnRecord>, rejected: usize) -> Result<PreparedData> {
    if records.is_empty() {
        return Err(Error::Data("no records left to cluster".into()));
    }
    let (codes, encodings) = label_encode(&records, &FEATURE_COLUMNS)?;
    let (unit, _) = min_max_normalize(&codes, NormalizationRange::UNIT)?;
    let (angle, _) = min_max_normalize(&codes, NormalizationRange::ANGLE)?;
    Ok(PreparedData {
        records,
        rejected,
        encodings,
        codes,
        unit,
        angle,
    })
}

pub fn prepare(spec: &RunSpec) -> Result<PreparedData> {
    let parsed = parse_kev_csv(&spec.input)?;
    for reject in &parsed.rejects {
        log::warn!("line {}: rejected ({})", reject.line, reject.reason);
    }
    let records = match spec.year {
        Some(year) => filter_year(&parsed.records, year),
        None => parsed.records,
    };
    prepare_records(records, parsed.rejects.len())
}

/// One algorithm's best-of-restarts outcome on the prepared data.
#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub result: ClusteringResult,
    pub selection: &'static str,
    pub best_restart: usize,
    /// WCSS (classical) or total fidelity (quantum) of the selected restart.
    pub objective: f64,
    /// Euclidean WCSS in the algorithm's feature space.
    pub wcss: f64,
    pub metrics: Option<MetricReport>,
    pub metrics_note: Option<String>,
    pub profiles: Vec<ClusterProfile>,
    /// Centroid markers in feature space; `None` for empty clusters.
    pub markers: Vec<Option<Vec<f64>>>,
}

pub fn run_algorithm(
    prep: &PreparedData,
    algorithm: Algorithm,
    spec: &RunSpec,
) -> Result<AlgorithmRun> {
    let features = prep.features(algorithm);
    if spec.k > features.n_rows() {
        return Err(Error::Config(format!(
            "k={} exceeds the number of records ({})",
            spec.k,
            features.n_rows()
        )));
    }
    let (result, selection, best_restart, objective, markers, wcss_value) =
        match algorithm.measure() {
            Some(measure) => {
                let config = KMeansConfig {
                    seed: spec.seed,
                    measure,
                    fidelity_mode: spec.fidelity_mode(),
                    kernel_measurement: spec.kernel_measurement,
                    ..KMeansConfig::new(spec.k)
                };
                let best = kmeans_best_of(features, &config, spec.restarts)?;
                let sizes = best.result.cluster_sizes();
                let markers = best
                    .result
                    .centroids
                    .iter()
                    .zip(sizes)
                    .map(|(c, n)| (n > 0).then(|| c.clone()))
                    .collect();
                let w = wcss(features, &best.result)?;
                (
                    best.result,
                    best.selection.name(),
                    best.restart,
                    best.objective,
                    markers,
                    w,
                )
            }
            None => {
                let config = SpectralConfig {
                    seed: spec.seed,
                    restarts: spec.restarts,
                    ..SpectralConfig::new(spec.k)
                };
                let result = spectral_cluster(features, &config)?;
                let markers = update_step(features, &result.assignments, spec.k)?;
                let means: Vec<Vec<f64>> = markers
                    .iter()
                    .map(|m| {
                        m.clone()
                            .unwrap_or_else(|| vec![f64::NAN; features.n_cols()])
                    })
                    .collect();
                let w: f64 = features
                    .rows()
                    .zip(&result.assignments)
                    .map(|(x, &a)| crate::dataset::sq_dist(x, &means[a]))
                    .sum();
                let objective = result.wcss_history.last().copied().unwrap_or(0.0);
                (result, "min_wcss_embedding", 0, objective, markers, w)
            }
        };
    for (j, m) in markers.iter().enumerate() {
        if m.is_none() {
            log::warn!("{}: cluster {j} is empty", algorithm.label());
        }
    }
    let (metrics, metrics_note) = match evaluate(features, &result.assignments) {
        Ok(m) => (Some(m), None),
        Err(e @ Error::MetricUndefined(_)) => {
            log::warn!("{}: {e}", algorithm.label());
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let profiles = cluster_profile(&prep.records, &result.assignments, spec.k)?;
    let run = AlgorithmRun {
        algorithm,
        result,
        selection,
        best_restart,
        objective,
        wcss: wcss_value,
        metrics,
        metrics_note,
        profiles,
        markers,
    };
    check_consistency(prep, &run)?;
    Ok(run)
}

/// Recomputes the metrics from the stored assignments and compares.
pub fn check_consistency(prep: &PreparedData, run: &AlgorithmRun) -> Result<()> {
    let Some(stored) = run.metrics else {
        return Ok(());
    };
    let fresh = evaluate(prep.features(run.algorithm), &run.result.assignments)?;
    let close = |a: f64, b: f64| (a - b).abs() <= REPORT_CONSISTENCY_TOL * a.abs().max(1.0);
    if !(close(stored.silhouette, fresh.silhouette)
        && close(stored.davies_bouldin, fresh.davies_bouldin)
        && close(stored.calinski_harabasz, fresh.calinski_harabasz))
    {
        return Err(Error::Internal(format!(
            "{}: stored metrics disagree with recomputation",
            run.algorithm.label()
        )));
    }
    let total: usize = run.profiles.iter().map(|p| p.size).sum();
    if total != prep.records.len() {
        return Err(Error::Internal(format!(
            "{}: cluster profile sizes sum to {total}, expected {}",
            run.algorithm.label(),
            prep.records.len()
        )));
    }
    Ok(())
}

pub fn run_selected(prep: &PreparedData, spec: &RunSpec) -> Result<Vec<AlgorithmRun>> {
    spec.algorithm
        .algorithms()
        .into_iter()
        .map(|a| run_algorithm(prep, a, spec))
        .collect()
}

/// Outcome of the `run` command.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: report::RunReport,
    pub runs: Vec<AlgorithmRun>,
    pub written: Vec<PathBuf>,
}

/// Runs the selected algorithm(s) and writes `report.json`, `metrics.csv`,
/// `profiles.md` and one `scatter_<algorithm>.svg` per algorithm.
pub fn cmd_run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let started = Instant::now();
    let prep = prepare(spec)?;
    let runs = run_selected(&prep, spec)?;
    let report = report::RunReport::build("run", spec, &prep, &runs, started.elapsed());
    let mut files = vec![
        ("report.json".to_string(), report.to_json()?.into_bytes()),
        (
            "metrics.csv".to_string(),
            report::metrics_csv(&runs).into_bytes(),
        ),
        (
            "profiles.md".to_string(),
            report::profiles_markdown(&prep, &runs).into_bytes(),
        ),
    ];
    for run in &runs {
        let svg = crate::svg::scatter_svg(
            prep.features(run.algorithm),
            &run.result.assignments,
            &run.markers,
            run.algorithm.label(),
            run.algorithm.range(),
        )?;
        files.push((
            format!("scatter_{}.svg", run.algorithm.key()),
            svg.into_bytes(),
        ));
    }
    let written = report::write_all(&spec.output_dir, &files)?;
    Ok(RunOutcome {
        report,
        runs,
        written,
    })
}

/// Outcome of the `elbow` command.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowOutcome {
    pub curve: Vec<(usize, f64)>,
    pub suggested_k: Option<usize>,
    pub written: Vec<PathBuf>,
}

/// Euclidean K-means WCSS over `k_min..=k_max` on the `[0, 1]` features;
/// writes `elbow.csv` and `elbow.svg`.
pub fn cmd_elbow(spec: &RunSpec) -> Result<ElbowOutcome> {
    spec.validate()?;
    let prep = prepare(spec)?;
    let base = KMeansConfig {
        seed: spec.seed,
        ..KMeansConfig::new(spec.k_min.max(1))
    };
    let curve = elbow_curve(&prep.unit, spec.k_min, spec.k_max, &base, spec.restarts)?;
    let suggested_k = elbow_point(&curve);
    let files = vec![
        (
            "elbow.csv".to_string(),
            report::elbow_csv(&curve).into_bytes(),
        ),
        (
            "elbow.svg".to_string(),
            crate::svg::elbow_svg(&curve, suggested_k).into_bytes(),
        ),
    ];
    let written = report::write_all(&spec.output_dir, &files)?;
    Ok(ElbowOutcome {
        curve,
        suggested_k,
        written,
    })
}

/// Outcome of the `compare` command.
#[derive(Debug)]
pub struct CompareOutcome {
    pub rows: Vec<report::ComparisonRow>,
    pub table: String,
    pub written: Vec<PathBuf>,
}

/// Runs all four algorithms and writes `comparison.csv` / `comparison.txt`.
pub fn cmd_compare(spec: &RunSpec) -> Result<CompareOutcome> {
    let spec = RunSpec {
        algorithm: AlgorithmChoice::All,
        ..spec.clone()
    };
    spec.validate()?;
    let prep = prepare(&spec)?;
    let runs = run_selected(&prep, &spec)?;
    let rows = report::comparison_rows(&runs);
    let table = report::comparison_text(&rows);
    let files = vec![
        (
            "comparison.csv".to_string(),
            report::comparison_csv(&rows).into_bytes(),
        ),
        ("comparison.txt".to_string(), table.clone().into_bytes()),
    ];
    let written = report::write_all(&spec.output_dir, &files)?;
    Ok(CompareOutcome {
        rows,
        table,
        written,
    })
}
