//! Internal clustering quality indices and the adjusted Rand index.
//!
//! All distances are Euclidean on the features the clustering ran on.
//! Cluster labels need not be contiguous: the distinct labels present in
//! the assignment vector define the clusters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{sq_dist, Dataset};
use crate::error::{Error, Result};

/// The three indices reported per algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub silhouette: f64,
    pub davies_bouldin: f64,
    pub calinski_harabasz: f64,
    pub k: usize,
    pub m: usize,
}

/// Cluster membership lists keyed by compacted label.
struct Partition {
    members: Vec<Vec<usize>>,
    label_of: Vec<usize>,
}

fn partition(data: &Dataset, assignments: &[usize]) -> Result<Partition> {
    if assignments.len() != data.n_rows() {
        return Err(Error::Usage(format!(
            "{} assignments for {} points",
            assignments.len(),
            data.n_rows()
        )));
    }
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for &a in assignments {
        let next = index.len();
        index.entry(a).or_insert(next);
    }
    // renumber in label order so results do not depend on first appearance
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let label_of: Vec<usize> = assignments.iter().map(|a| index[a]).collect();
    let mut members = vec![Vec::new(); index.len()];
    for (i, &l) in label_of.iter().enumerate() {
        members[l].push(i);
    }
    Ok(Partition { members, label_of })
}

fn require_k(k: usize, m: usize, metric: &str) -> Result<()> {
    if k < 2 {
        return Err(Error::MetricUndefined(format!(
            "{metric} needs at least 2 clusters, got {k}"
        )));
    }
    if k > m.saturating_sub(1) {
        return Err(Error::MetricUndefined(format!(
            "{metric} needs k <= M - 1, got k={k} with M={m}"
        )));
    }
    Ok(())
}

fn centroid(data: &Dataset, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; data.n_cols()];
    for &i in members {
        for (s, v) in c.iter_mut().zip(data.row(i)) {
            *s += v;
        }
    }
    c.iter_mut().for_each(|v| *v /= members.len() as f64);
    c
}

/// Mean silhouette coefficient. Points in singleton clusters score 0, as do
/// points with `a = b = 0`.
pub fn silhouette(data: &Dataset, assignments: &[usize]) -> Result<f64> {
    let part = partition(data, assignments)?;
    let k = part.members.len();
    let m = data.n_rows();
    require_k(k, m, "silhouette")?;
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..m {
        let own = part.label_of[i];
        if part.members[own].len() == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        let xi = data.row(i);
        for (j, xj) in data.rows().enumerate() {
            if j != i {
                sums[part.label_of[j]] += sq_dist(xi, xj).sqrt();
            }
        }
        let a = sums[own] / (part.members[own].len() - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / part.members[c].len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / m as f64)
}

/// Davies–Bouldin index: mean over clusters of the worst
/// `(s_i + s_j) / d(c_i, c_j)` ratio.
pub fn davies_bouldin(data: &Dataset, assignments: &[usize]) -> Result<f64> {
    let part = partition(data, assignments)?;
    let k = part.members.len();
    require_k(k, data.n_rows(), "Davies-Bouldin")?;
    let centroids: Vec<Vec<f64>> = part.members.iter().map(|mem| centroid(data, mem)).collect();
    let spread: Vec<f64> = part
        .members
        .iter()
        .zip(&centroids)
        .map(|(mem, c)| {
            mem.iter()
                .map(|&i| sq_dist(data.row(i), c).sqrt())
                .sum::<f64>()
                / mem.len() as f64
        })
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = sq_dist(&centroids[i], &centroids[j]).sqrt();
            if d == 0.0 {
                return Err(Error::MetricUndefined(format!(
                    "Davies-Bouldin: clusters {i} and {j} have coincident centroids"
                )));
            }
            worst = worst.max((spread[i] + spread[j]) / d);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Calinski–Harabasz index `(B / (k - 1)) / (W / (M - k))`.
pub fn calinski_harabasz(data: &Dataset, assignments: &[usize]) -> Result<f64> {
    let part = partition(data, assignments)?;
    let k = part.members.len();
    let m = data.n_rows();
    require_k(k, m, "Calinski-Harabasz")?;
    let all: Vec<usize> = (0..m).collect();
    let grand = centroid(data, &all);
    let mut between = 0.0;
    let mut within = 0.0;
    for mem in &part.members {
        let c = centroid(data, mem);
        between += mem.len() as f64 * sq_dist(&c, &grand);
        within += mem.iter().map(|&i| sq_dist(data.row(i), &c)).sum::<f64>();
    }
    if within == 0.0 {
        return Err(Error::MetricUndefined(
            "Calinski-Harabasz: zero within-cluster dispersion (infinite score)".into(),
        ));
    }
    Ok((between / (k - 1) as f64) / (within / (m - k) as f64))
}

/// All three indices at once.
pub fn evaluate(data: &Dataset, assignments: &[usize]) -> Result<MetricReport> {
    let part = partition(data, assignments)?;
    Ok(MetricReport {
        silhouette: silhouette(data, assignments)?,
        davies_bouldin: davies_bouldin(data, assignments)?,
        calinski_harabasz: calinski_harabasz(data, assignments)?,
        k: part.members.len(),
        m: data.n_rows(),
    })
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Pair-counting adjusted Rand index between two labelings.
pub fn adjusted_rand_index(labels_a: &[usize], labels_b: &[usize]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::Usage(format!(
            "label vectors differ in length: {} vs {}",
            labels_a.len(),
            labels_b.len()
        )));
    }
    let n = labels_a.len() as u64;
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        // both labelings are trivial (all-one or all-singleton)
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}
