//! K-means (classical and quantum-assisted) and spectral clustering.

mod eigen;
mod kmeans;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::encode::{FidelityMode, KernelMeasurement};

pub use eigen::{symmetric_eig, SymmetricEigen};
pub use kmeans::{
    assign_step, assign_with, elbow_curve, elbow_point, kmeans, kmeans_best_of, kmeans_with,
    similarity_for, total_score, update_step, wcss, wcss_of, AnalyticSimilarity, BestOf,
    EuclideanSimilarity, KernelSimilarity, Selection, Similarity, SwapTestSimilarity, TIE_EPS,
};
pub use spectral::{
    laplacian_matrix, median_pairwise_distance, spectral_cluster, spectral_embedding, Laplacian,
    SpectralConfig,
};

/// Rule used to assign points to centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMeasure {
    /// Nearest centroid by Euclidean distance.
    Euclidean,
    /// Highest swap-test fidelity between angle-encoded states.
    SwapTest,
    /// Highest kernel-circuit fidelity between angle-encoded states.
    QuantumKernel,
}

impl DistanceMeasure {
    pub fn is_quantum(self) -> bool {
        !matches!(self, DistanceMeasure::Euclidean)
    }
}

/// Centroid initialization strategy.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Init {
    /// `k` distinct rows drawn uniformly at random.
    #[default]
    RandomRows,
    /// D²-weighted seeding.
    KMeansPlusPlus,
    /// Caller-supplied centroids.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub seed: u64,
    pub measure: DistanceMeasure,
    pub fidelity_mode: FidelityMode,
    pub kernel_measurement: KernelMeasurement,
    pub init: Init,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
            measure: DistanceMeasure::Euclidean,
            fidelity_mode: FidelityMode::Exact,
            kernel_measurement: KernelMeasurement::AllZeros,
            init: Init::RandomRows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    /// WCSS after each centroid update.
    pub wcss_history: Vec<f64>,
    /// Summed winning fidelity per assignment step (quantum measures only).
    pub fidelity_history: Vec<f64>,
    pub converged: bool,
}

impl ClusteringResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}
