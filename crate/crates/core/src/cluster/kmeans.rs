//! Lloyd-style K-means with a pluggable assignment rule.
//!
//! The assignment step picks, for every point, the centroid with the highest
//! [`Similarity`] score: negative squared Euclidean distance for the
//! classical variant, a circuit fidelity for the quantum variants. The
//! update step is always the arithmetic mean in feature space.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ClusteringResult, DistanceMeasure, Init, KMeansConfig};
use crate::dataset::{sq_dist, Dataset};
use crate::encode::{
    analytic_fidelity, kernel_fidelity_with, swap_test_fidelity, AngleVector, FidelityMode,
    KernelMeasurement,
};
use crate::error::{Error, Result};

/// Scores closer than this are treated as tied; ties go to the lower index.
pub const TIE_EPS: f64 = 1e-12;

/// Point-to-centroid score used by the assignment step. Higher is closer.
pub trait Similarity: Sync {
    fn score(&self, point: &[f64], centroid: &[f64]) -> Result<f64>;

    /// Whether the score is a fidelity (recorded in the fidelity history).
    fn is_fidelity(&self) -> bool;
}

/// Negative squared Euclidean distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct EuclideanSimilarity;

impl Similarity for EuclideanSimilarity {
    fn score(&self, point: &[f64], centroid: &[f64]) -> Result<f64> {
        Ok(-sq_dist(point, centroid))
    }

    fn is_fidelity(&self) -> bool {
        false
    }
}

/// Swap-test fidelity between angle-encoded point and centroid.
#[derive(Debug, Clone, Copy)]
pub struct SwapTestSimilarity {
    pub mode: FidelityMode,
}

impl Similarity for SwapTestSimilarity {
    fn score(&self, point: &[f64], centroid: &[f64]) -> Result<f64> {
        let x = AngleVector::new(point)?;
        let c = AngleVector::new(centroid)?;
        Ok(swap_test_fidelity(&x, &c, self.mode)?.value())
    }

    fn is_fidelity(&self) -> bool {
        true
    }
}

/// Kernel-circuit fidelity `|<0|U†(c) U(x)|0>|^2`.
#[derive(Debug, Clone, Copy)]
pub struct KernelSimilarity {
    pub mode: FidelityMode,
    pub measurement: KernelMeasurement,
}

impl Similarity for KernelSimilarity {
    fn score(&self, point: &[f64], centroid: &[f64]) -> Result<f64> {
        let x = AngleVector::new(point)?;
        let c = AngleVector::new(centroid)?;
        Ok(kernel_fidelity_with(&x, &c, self.mode, self.measurement)?.value())
    }

    fn is_fidelity(&self) -> bool {
        true
    }
}

/// Closed-form product-state overlap; no circuit is simulated.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticSimilarity;

impl Similarity for AnalyticSimilarity {
    fn score(&self, point: &[f64], centroid: &[f64]) -> Result<f64> {
        let x = AngleVector::new(point)?;
        let c = AngleVector::new(centroid)?;
        Ok(analytic_fidelity(&x, &c)?.value())
    }

    fn is_fidelity(&self) -> bool {
        true
    }
}

/// Builds the similarity that `config` selects.
pub fn similarity_for(config: &KMeansConfig) -> Box<dyn Similarity> {
    match config.measure {
        DistanceMeasure::Euclidean => Box::new(EuclideanSimilarity),
        DistanceMeasure::SwapTest => Box::new(SwapTestSimilarity {
            mode: config.fidelity_mode,
        }),
        DistanceMeasure::QuantumKernel => Box::new(KernelSimilarity {
            mode: config.fidelity_mode,
            measurement: config.kernel_measurement,
        }),
    }
}

fn best_index(scores: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, s) in scores.enumerate() {
        if s > best.1 + TIE_EPS || best.1 == f64::NEG_INFINITY {
            best = (j, s);
        }
    }
    best
}

/// Assigns each point to its highest-scoring centroid. Returns the
/// assignments and the summed winning score.
pub fn assign_with(
    data: &Dataset,
    centroids: &[Vec<f64>],
    similarity: &dyn Similarity,
) -> Result<(Vec<usize>, f64)> {
    if centroids.is_empty() {
        return Err(Error::Usage(
            "assignment needs at least one centroid".into(),
        ));
    }
    let picks: Vec<(usize, f64)> = (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let scores = centroids
                .iter()
                .map(|c| similarity.score(x, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(best_index(scores.into_iter()))
        })
        .collect::<Result<_>>()?;
    let total = picks.iter().map(|p| p.1).sum();
    Ok((picks.into_iter().map(|p| p.0).collect(), total))
}

/// Assignment step for a [`DistanceMeasure`] (all-zeros kernel readout).
pub fn assign_step(
    data: &Dataset,
    centroids: &[Vec<f64>],
    measure: DistanceMeasure,
    fidelity_mode: FidelityMode,
) -> Result<Vec<usize>> {
    let config = KMeansConfig {
        measure,
        fidelity_mode,
        ..KMeansConfig::new(centroids.len())
    };
    Ok(assign_with(data, centroids, similarity_for(&config).as_ref())?.0)
}

/// Per-cluster arithmetic means. Clusters with no members yield `None`.
pub fn update_step(
    data: &Dataset,
    assignments: &[usize],
    k: usize,
) -> Result<Vec<Option<Vec<f64>>>> {
    check_assignments(data, assignments, k)?;
    let n = data.n_cols();
    let mut sums = vec![vec![0.0; n]; k];
    let mut counts = vec![0usize; k];
    for (row, &a) in data.rows().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| s.into_iter().map(|v| v / c as f64).collect()))
        .collect())
}

fn check_assignments(data: &Dataset, assignments: &[usize], k: usize) -> Result<()> {
    if assignments.len() != data.n_rows() {
        return Err(Error::Usage(format!(
            "{} assignments for {} points",
            assignments.len(),
            data.n_rows()
        )));
    }
    if let Some(&a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::Usage(format!(
            "assignment {a} out of range for k={k}"
        )));
    }
    Ok(())
}

/// Within-cluster sum of squared Euclidean errors.
pub fn wcss_of(data: &Dataset, assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.rows()
        .zip(assignments)
        .map(|(x, &a)| sq_dist(x, &centroids[a]))
        .sum()
}

/// WCSS of a clustering result, always measured with Euclidean distance.
pub fn wcss(data: &Dataset, result: &ClusteringResult) -> Result<f64> {
    check_assignments(data, &result.assignments, result.centroids.len())?;
    Ok(wcss_of(data, &result.assignments, &result.centroids))
}

/// Summed similarity of each point to its assigned centroid.
pub fn total_score(
    data: &Dataset,
    result: &ClusteringResult,
    similarity: &dyn Similarity,
) -> Result<f64> {
    check_assignments(data, &result.assignments, result.centroids.len())?;
    data.rows()
        .zip(&result.assignments)
        .map(|(x, &a)| similarity.score(x, &result.centroids[a]))
        .sum()
}

/// Fills empty clusters with the points worst fitted by their own centroid.
fn reseed_empty(
    data: &Dataset,
    assignments: &[usize],
    means: Vec<Option<Vec<f64>>>,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let empty: Vec<usize> = (0..means.len()).filter(|&j| means[j].is_none()).collect();
    let mut centroids: Vec<Vec<f64>> = means
        .into_iter()
        .zip(previous)
        .map(|(m, p)| m.unwrap_or_else(|| p.clone()))
        .collect();
    if empty.is_empty() {
        return centroids;
    }
    let mut residuals: Vec<(usize, f64)> = data
        .rows()
        .zip(assignments)
        .enumerate()
        .map(|(i, (x, &a))| (i, sq_dist(x, &centroids[a])))
        .collect();
    // largest residual first, lowest index among equals
    residuals.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (j, (i, _)) in empty.into_iter().zip(residuals) {
        log::debug!("reseeding empty cluster {j} with point {i}");
        centroids[j] = data.row(i).to_vec();
    }
    centroids
}

fn initial_centroids(data: &Dataset, config: &KMeansConfig) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match &config.init {
        Init::RandomRows => Ok(sample(&mut rng, data.n_rows(), config.k)
            .into_iter()
            .map(|i| data.row(i).to_vec())
            .collect()),
        Init::KMeansPlusPlus => {
            let first = rng.random_range(0..data.n_rows());
            let mut centroids = vec![data.row(first).to_vec()];
            let mut d2: Vec<f64> = data.rows().map(|x| sq_dist(x, &centroids[0])).collect();
            while centroids.len() < config.k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.random::<f64>() * total;
                    let mut pick = d2.len() - 1;
                    for (i, &w) in d2.iter().enumerate() {
                        if target < w {
                            pick = i;
                            break;
                        }
                        target -= w;
                    }
                    pick
                } else {
                    rng.random_range(0..data.n_rows())
                };
                let c = data.row(next).to_vec();
                for (d, x) in d2.iter_mut().zip(data.rows()) {
                    *d = d.min(sq_dist(x, &c));
                }
                centroids.push(c);
            }
            Ok(centroids)
        }
        Init::Explicit(centroids) => {
            if centroids.len() != config.k {
                return Err(Error::Config(format!(
                    "{} explicit centroids for k={}",
                    centroids.len(),
                    config.k
                )));
            }
            if let Some(c) = centroids.iter().find(|c| c.len() != data.n_cols()) {
                return Err(Error::Config(format!(
                    "explicit centroid has {} features, data has {}",
                    c.len(),
                    data.n_cols()
                )));
            }
            Ok(centroids.clone())
        }
    }
}

fn validate(data: &Dataset, config: &KMeansConfig) -> Result<()> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if config.k > data.n_rows() {
        return Err(Error::Config(format!(
            "k={} exceeds the number of points ({})",
            config.k,
            data.n_rows()
        )));
    }
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::Config(format!(
            "tol must be positive, got {}",
            config.tol
        )));
    }
    if config.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    config.fidelity_mode.validate()?;
    if config.measure.is_quantum() {
        for row in data.rows() {
            AngleVector::new(row)?;
        }
    }
    Ok(())
}

/// Runs K-means with the similarity selected by `config.measure`.
pub fn kmeans(data: &Dataset, config: &KMeansConfig) -> Result<ClusteringResult> {
    validate(data, config)?;
    kmeans_with(data, config, similarity_for(config).as_ref())
}

/// Runs K-means with an explicit similarity. `config.measure` is ignored.
pub fn kmeans_with(
    data: &Dataset,
    config: &KMeansConfig,
    similarity: &dyn Similarity,
) -> Result<ClusteringResult> {
    validate(
        data,
        &KMeansConfig {
            measure: DistanceMeasure::Euclidean,
            ..config.clone()
        },
    )?;
    let mut centroids = initial_centroids(data, config)?;
    let mut previous: Option<Vec<usize>> = None;
    let mut wcss_history = Vec::new();
    let mut fidelity_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        let (assignments, total) = assign_with(data, &centroids, similarity)?;
        if similarity.is_fidelity() {
            fidelity_history.push(total);
        }
        if previous.as_ref() == Some(&assignments) {
            converged = true;
            break;
        }
        let means = update_step(data, &assignments, config.k)?;
        let next = reseed_empty(data, &assignments, means, &centroids);
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        wcss_history.push(wcss_of(data, &assignments, &next));
        centroids = next;
        previous = Some(assignments);
        if shift < config.tol {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        centroids,
        assignments: previous.expect("at least one iteration ran"),
        iterations,
        wcss_history,
        fidelity_history,
        converged,
    })
}

/// Which restart wins in [`kmeans_best_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Lowest final WCSS.
    MinWcss,
    /// Highest summed fidelity to the final centroids.
    MaxTotalFidelity,
}

impl Selection {
    pub fn for_measure(measure: DistanceMeasure) -> Self {
        if measure.is_quantum() {
            Selection::MaxTotalFidelity
        } else {
            Selection::MinWcss
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Selection::MinWcss => "min_wcss",
            Selection::MaxTotalFidelity => "max_total_fidelity",
        }
    }
}

/// Outcome of a multi-restart run.
#[derive(Debug, Clone)]
pub struct BestOf {
    pub result: ClusteringResult,
    /// Index of the winning restart; its seed is `config.seed + restart`.
    pub restart: usize,
    /// WCSS or total fidelity of the winner, per the selection rule.
    pub objective: f64,
    pub selection: Selection,
}

/// Runs `restarts` seeded K-means runs (seed `config.seed + r`) and keeps the
/// best one. Ties keep the lowest restart index.
pub fn kmeans_best_of(data: &Dataset, config: &KMeansConfig, restarts: usize) -> Result<BestOf> {
    if restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    validate(data, config)?;
    let similarity = similarity_for(config);
    let selection = Selection::for_measure(config.measure);
    let runs: Vec<(ClusteringResult, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let cfg = KMeansConfig {
                seed: config.seed.wrapping_add(r as u64),
                ..config.clone()
            };
            let result = kmeans_with(data, &cfg, similarity.as_ref())?;
            let objective = match selection {
                Selection::MinWcss => wcss(data, &result)?,
                Selection::MaxTotalFidelity => total_score(data, &result, similarity.as_ref())?,
            };
            Ok((result, objective))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        let better = match selection {
            Selection::MinWcss => run.1 < runs[best].1,
            Selection::MaxTotalFidelity => run.1 > runs[best].1,
        };
        if better {
            best = r;
        }
    }
    let (result, objective) = runs.into_iter().nth(best).expect("restarts >= 1");
    Ok(BestOf {
        result,
        restart: best,
        objective,
        selection,
    })
}

/// Best WCSS for each `k` in `k_min..=k_max`, sorted by `k`.
///
/// Each `k` keeps the best of `restarts` seeded runs plus one run warm-started
/// from the previous `k`'s winner with the worst-fitted point added as a new
/// centroid, so the returned curve never increases with `k`.
pub fn elbow_curve(
    data: &Dataset,
    k_min: usize,
    k_max: usize,
    base: &KMeansConfig,
    restarts: usize,
) -> Result<Vec<(usize, f64)>> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::Usage(format!("empty k range [{k_min}, {k_max}]")));
    }
    if k_max > data.n_rows() {
        return Err(Error::Config(format!(
            "k_max={k_max} exceeds the number of points ({})",
            data.n_rows()
        )));
    }
    let mut curve = Vec::with_capacity(k_max - k_min + 1);
    let mut carried: Option<ClusteringResult> = None;
    for k in k_min..=k_max {
        let config = KMeansConfig {
            k,
            init: Init::RandomRows,
            ..base.clone()
        };
        let mut best = kmeans_best_of(data, &config, restarts)?;
        if let Some(prev) = carried.take() {
            let mut seeds = prev.centroids.clone();
            let worst = data
                .rows()
                .zip(&prev.assignments)
                .enumerate()
                .map(|(i, (x, &a))| (i, sq_dist(x, &prev.centroids[a])))
                .fold((0, f64::NEG_INFINITY), |acc, cur| {
                    if cur.1 > acc.1 {
                        cur
                    } else {
                        acc
                    }
                });
            seeds.push(data.row(worst.0).to_vec());
            let warm = kmeans_with(
                data,
                &KMeansConfig {
                    init: Init::Explicit(seeds),
                    ..config.clone()
                },
                similarity_for(&config).as_ref(),
            )?;
            let warm_wcss = wcss(data, &warm)?;
            if warm_wcss < best.objective {
                best.result = warm;
                best.objective = warm_wcss;
            }
        }
        let value = wcss(data, &best.result)?;
        curve.push((k, value));
        carried = Some(best.result);
    }
    Ok(curve)
}

/// `k` at which the discrete second difference `W(k-1) - 2W(k) + W(k+1)`
/// peaks. Needs at least three consecutive points; ties pick the smaller `k`.
pub fn elbow_point(curve: &[(usize, f64)]) -> Option<usize> {
    curve
        .windows(3)
        .map(|w| (w[1].0, w[0].1 - 2.0 * w[1].1 + w[2].1))
        .fold(None, |best: Option<(usize, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(|b| b.0)
}
