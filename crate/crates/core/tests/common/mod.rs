//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn labels_of(y: &[usize]) -> Vec<usize> {
    let mut l: Vec<usize> = y.to_vec();
    l.sort();
    l.dedup();
    l
}

pub fn mean_of(x: &[Vec<f64>], y: &[usize], label: usize) -> Vec<f64> {
    let d = x[0].len();
    let mut c = vec![0.0; d];
    let mut n = 0.0;
    for i in 0..x.len() {
        if y[i] == label {
            for j in 0..d {
                c[j] += x[i][j];
            }
            n += 1.0;
        }
    }
    for v in c.iter_mut() {
        *v /= n;
    }
    c
}

pub fn naive_silhouette(x: &[Vec<f64>], y: &[usize]) -> f64 {
    let labels = labels_of(y);
    let mut total = 0.0;
    for i in 0..x.len() {
        let own = y.iter().filter(|&&l| l == y[i]).count();
        if own == 1 {
            continue;
        }
        let mut a = 0.0;
        for j in 0..x.len() {
            if j != i && y[j] == y[i] {
                a += dist(&x[i], &x[j]);
            }
        }
        a /= (own - 1) as f64;
        let mut b = f64::INFINITY;
        for &l in &labels {
            if l == y[i] {
                continue;
            }
            let mut s = 0.0;
            let mut n = 0.0;
            for j in 0..x.len() {
                if y[j] == l {
                    s += dist(&x[i], &x[j]);
                    n += 1.0;
                }
            }
            b = b.min(s / n);
        }
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / x.len() as f64
}

pub fn naive_davies_bouldin(x: &[Vec<f64>], y: &[usize]) -> f64 {
    let labels = labels_of(y);
    let centers: Vec<Vec<f64>> = labels.iter().map(|&l| mean_of(x, y, l)).collect();
    let mut spread = Vec::new();
    for (c, &l) in labels.iter().enumerate() {
        let mut s = 0.0;
        let mut n = 0.0;
        for i in 0..x.len() {
            if y[i] == l {
                s += dist(&x[i], &centers[c]);
                n += 1.0;
            }
        }
        spread.push(s / n);
    }
    let mut total = 0.0;
    for a in 0..labels.len() {
        let mut worst: f64 = 0.0;
        for b in 0..labels.len() {
            if a != b {
                worst = worst.max((spread[a] + spread[b]) / dist(&centers[a], &centers[b]));
            }
        }
        total += worst;
    }
    total / labels.len() as f64
}

pub fn naive_calinski_harabasz(x: &[Vec<f64>], y: &[usize]) -> f64 {
    let labels = labels_of(y);
    let all: Vec<usize> = vec![0; x.len()];
    let overall = mean_of(x, &all, 0);
    let mut between = 0.0;
    let mut within = 0.0;
    for &l in &labels {
        let c = mean_of(x, y, l);
        let n = y.iter().filter(|&&v| v == l).count() as f64;
        between += n * dist(&c, &overall).powi(2);
        for i in 0..x.len() {
            if y[i] == l {
                within += dist(&x[i], &c).powi(2);
            }
        }
    }
    let (m, k) = (x.len() as f64, labels.len() as f64);
    between * (m - k) / (within * (k - 1.0))
}

/// Random points with `k <= 4` labels, every label used, `k <= M - 1`.
pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let m = rng.random_range(5..=30);
    let k = rng.random_range(2..=4);
    let d = rng.random_range(1..=3);
    let x: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let y: Vec<usize> = (0..m)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    (x, y)
}
