//! Spectral clustering on a Gaussian affinity graph.
//!
//! Points become graph vertices weighted by `exp(-|x_i - x_j|^2 / (2 sigma^2))`.
//! The eigenvectors of the `k` smallest Laplacian eigenvalues form an
//! embedding whose rows are normalized to unit length and clustered with
//! Euclidean K-means.

use serde::{Deserialize, Serialize};

use super::{kmeans_best_of, symmetric_eig, ClusteringResult, KMeansConfig};
use crate::dataset::{sq_dist, Dataset};
use crate::error::{Error, Result};

/// Floor applied to vertex degrees before taking `D^{-1/2}`.
const DEGREE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Laplacian {
    /// `I - D^{-1/2} A D^{-1/2}`
    #[default]
    NormalizedSymmetric,
    /// `D - A`
    Unnormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub k: usize,
    /// Gaussian bandwidth; `None` uses the median pairwise distance.
    pub sigma: Option<f64>,
    pub laplacian: Laplacian,
    pub seed: u64,
    /// K-means restarts in the embedding space.
    pub restarts: usize,
}

impl SpectralConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            sigma: None,
            laplacian: Laplacian::NormalizedSymmetric,
            seed: 0,
            restarts: 10,
        }
    }
}

/// Median of the Euclidean distances over all pairs `i < j`.
pub fn median_pairwise_distance(data: &Dataset) -> f64 {
    let m = data.n_rows();
    let mut dists: Vec<f64> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(data.row(i), data.row(j)).sqrt())
        .collect();
    if dists.is_empty() {
        return 0.0;
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    }
}

fn resolve_sigma(data: &Dataset, sigma: Option<f64>) -> Result<f64> {
    if let Some(s) = sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {s}")));
        }
        return Ok(s);
    }
    let median = median_pairwise_distance(data);
    if median > 0.0 {
        return Ok(median);
    }
    // more than half of all pairs coincide; fall back to the mean positive distance
    let m = data.n_rows();
    let positive: Vec<f64> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(data.row(i), data.row(j)).sqrt())
        .filter(|&d| d > 0.0)
        .collect();
    if positive.is_empty() {
        Ok(1.0)
    } else {
        Ok(positive.iter().sum::<f64>() / positive.len() as f64)
    }
}

/// Graph Laplacian (row-major `M x M`) of the Gaussian affinity graph.
pub fn laplacian_matrix(data: &Dataset, sigma: f64, kind: Laplacian) -> Vec<f64> {
    let m = data.n_rows();
    let mut affinity = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let w = (-sq_dist(data.row(i), data.row(j)) / (2.0 * sigma * sigma)).exp();
            affinity[i * m + j] = w;
            affinity[j * m + i] = w;
        }
    }
    let degrees: Vec<f64> = affinity.chunks_exact(m).map(|r| r.iter().sum()).collect();
    let mut lap = vec![0.0; m * m];
    match kind {
        Laplacian::Unnormalized => {
            for i in 0..m {
                for j in 0..m {
                    lap[i * m + j] = if i == j {
                        degrees[i]
                    } else {
                        -affinity[i * m + j]
                    };
                }
            }
        }
        Laplacian::NormalizedSymmetric => {
            let isolated = degrees.iter().filter(|&&d| d < DEGREE_FLOOR).count();
            if isolated > 0 {
                log::warn!(
                    "{isolated} vertices have near-zero degree; flooring at {DEGREE_FLOOR:e}"
                );
            }
            let inv_sqrt: Vec<f64> = degrees
                .iter()
                .map(|&d| 1.0 / d.max(DEGREE_FLOOR).sqrt())
                .collect();
            for i in 0..m {
                for j in 0..m {
                    let off = affinity[i * m + j] * inv_sqrt[i] * inv_sqrt[j];
                    lap[i * m + j] = if i == j { 1.0 - off } else { -off };
                }
            }
        }
    }
    lap
}

/// Row-normalized spectral embedding (`M x k`), one row per point.
pub fn spectral_embedding(data: &Dataset, config: &SpectralConfig) -> Result<Dataset> {
    let m = data.n_rows();
    if config.k == 0 || config.k > m {
        return Err(Error::Config(format!(
            "spectral clustering needs 1 <= k <= M, got k={} with M={m}",
            config.k
        )));
    }
    let sigma = resolve_sigma(data, config.sigma)?;
    let lap = laplacian_matrix(data, sigma, config.laplacian);
    let eig = symmetric_eig(&lap, m)?;
    let k = config.k;
    let mut rows = Vec::with_capacity(m * k);
    for i in 0..m {
        let row: Vec<f64> = (0..k).map(|j| eig.vectors[i * m + j]).collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            rows.extend(row.iter().map(|v| v / norm));
        } else {
            rows.extend(row);
        }
    }
    Dataset::from_flat(m, k, rows)
}

/// Clusters `data` via its spectral embedding. Centroids are reported in
/// embedding space; assignments refer to the original rows.
pub fn spectral_cluster(data: &Dataset, config: &SpectralConfig) -> Result<ClusteringResult> {
    let embedding = spectral_embedding(data, config)?;
    let kmeans_config = KMeansConfig {
        seed: config.seed,
        ..KMeansConfig::new(config.k)
    };
    Ok(kmeans_best_of(&embedding, &kmeans_config, config.restarts.max(1))?.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs() -> Dataset {
        Dataset::from_rows(&[[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]).unwrap()
    }

    #[test]
    fn separates_far_pairs() {
        let data = pairs();
        let result = spectral_cluster(&data, &SpectralConfig::new(2)).unwrap();
        let a = &result.assignments;
        assert_eq!(a[0], a[1]);
        assert_eq!(a[2], a[3]);
        assert_ne!(a[0], a[2]);
    }

    #[test]
    fn normalized_laplacian_null_space() {
        let data = Dataset::from_rows(&[[0.0], [0.3], [0.9], [1.4], [2.0]]).unwrap();
        let sigma = 0.8;
        let lap = laplacian_matrix(&data, sigma, Laplacian::NormalizedSymmetric);
        let eig = symmetric_eig(&lap, 5).unwrap();
        assert!(eig.values[0].abs() < 1e-8);
        // null vector is proportional to sqrt(degree)
        let degrees: Vec<f64> = (0..5)
            .map(|i| {
                (0..5)
                    .filter(|&j| j != i)
                    .map(|j| (-sq_dist(data.row(i), data.row(j)) / (2.0 * sigma * sigma)).exp())
                    .sum::<f64>()
            })
            .collect();
        let expected: Vec<f64> = degrees.iter().map(|d| d.sqrt()).collect();
        let norm = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = eig.vector(0);
        let dot: f64 = v.iter().zip(&expected).map(|(a, b)| a * b / norm).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn median_distance() {
        let data = Dataset::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        // distances 1, 3, 2
        assert_eq!(median_pairwise_distance(&data), 2.0);
    }

    #[test]
    fn isolated_vertex_is_floored() {
        let data = Dataset::from_rows(&[[0.0], [0.01], [1000.0]]).unwrap();
        let config = SpectralConfig {
            sigma: Some(0.1),
            ..SpectralConfig::new(2)
        };
        let result = spectral_cluster(&data, &config).unwrap();
        assert_eq!(result.assignments[0], result.assignments[1]);
        assert_ne!(result.assignments[0], result.assignments[2]);
    }

    #[test]
    fn rejects_bad_config() {
        let data = pairs();
        assert!(spectral_cluster(&data, &SpectralConfig::new(5)).is_err());
        let bad = SpectralConfig {
            sigma: Some(0.0),
            ..SpectralConfig::new(2)
        };
        assert!(spectral_cluster(&data, &bad).is_err());
    }
}
