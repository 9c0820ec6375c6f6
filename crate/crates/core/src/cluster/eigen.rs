//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V^T`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    n: usize,
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

#[inline]
fn rotate(
    a: &mut [f64],
    n: usize,
    (i, j): (usize, usize),
    (k, l): (usize, usize),
    s: f64,
    tau: f64,
) {
    let g = a[i * n + j];
    let h = a[k * n + l];
    a[i * n + j] = g - s * (h + g * tau);
    a[k * n + l] = h + s * (g - h * tau);
}

/// Decomposes the row-major `n x n` symmetric `matrix`.
///
/// Only the upper triangle is rotated; the input is checked for symmetry
/// first and rejected if any pair differs by more than `1e-9`.
pub fn symmetric_eig(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if n == 0 || matrix.len() != n * n {
        return Err(Error::Usage(format!(
            "expected a non-empty {n}x{n} matrix, got {} entries",
            matrix.len()
        )));
    }
    if let Some(bad) = matrix.iter().position(|v| !v.is_finite()) {
        return Err(Error::Usage(format!("non-finite matrix entry at {bad}")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (matrix[i * n + j] - matrix[j * n + i]).abs() > SYMMETRY_TOL {
                return Err(Error::Usage(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].abs())
            .sum();
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[p * n + q] = 0.0;
                for j in 0..p {
                    rotate(&mut a, n, (j, p), (j, q), s, tau);
                }
                for j in p + 1..q {
                    rotate(&mut a, n, (p, j), (j, q), s, tau);
                }
                for j in q + 1..n {
                    rotate(&mut a, n, (p, j), (q, j), s, tau);
                }
                for j in 0..n {
                    rotate(&mut v, n, (j, p), (j, q), s, tau);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        log::warn!("Jacobi eigensolver hit {MAX_SWEEPS} sweeps without full convergence");
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    Ok(SymmetricEigen { n, values, vectors })
}
