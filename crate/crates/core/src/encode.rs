//! Feature-to-state encodings and the quantum similarity circuits.
//!
//! Angle encoding maps a feature `x` to `cos(x)|0> + sin(x)|1>`, realized as
//! `RY(2x)` on a fresh qubit, one qubit per feature. Two circuits estimate
//! the squared overlap `F = |<psi(x)|psi(c)>|^2` between a point and a
//! centroid:
//!
//! * the swap test, on `2N + 1` qubits, where the ancilla reads `0` with
//!   probability `(1 + F) / 2`;
//! * the kernel circuit `U†(c) U(x) |0...0>` on `N` qubits, where the
//!   all-zeros outcome has probability `F`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{StateVector, MAX_QUBITS};

/// Slack allowed at the ends of `[0, pi]` before a value is rejected.
const ANGLE_SLACK: f64 = 1e-12;

/// Feature vector validated to lie in `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(values: impl Into<Vec<f64>>) -> Result<Self> {
        let mut values = values.into();
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -ANGLE_SLACK || *v > PI + ANGLE_SLACK {
                return Err(Error::Encoding {
                    index,
                    reason: format!("angle {v} outside [0, pi]"),
                });
            }
            *v = v.clamp(0.0, PI);
        }
        if values.is_empty() {
            return Err(Error::Encoding {
                index: 0,
                reason: "empty feature vector".into(),
            });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How a circuit's measurement probability is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FidelityMode {
    /// Exact probability from the statevector.
    #[default]
    Exact,
    /// Binomial estimate from `shots` measurements.
    Sampled { shots: u64, seed: u64 },
}

impl FidelityMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            FidelityMode::Sampled { shots: 0, .. } => {
                Err(Error::Config("sampled fidelity needs shots >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Which outcome of the kernel circuit is taken as the similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelMeasurement {
    /// Probability of the all-zeros outcome. Equals the squared overlap.
    #[default]
    AllZeros,
    /// Probability that qubit 0 alone reads `0`.
    FirstQubit,
}

/// Squared overlap between two encoded states, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fidelity(f64);

impl Fidelity {
    pub fn new(raw: f64) -> Self {
        Fidelity(raw.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_dims(x: &AngleVector, c: &AngleVector) -> Result<usize> {
    if x.len() != c.len() {
        return Err(Error::Usage(format!(
            "dimension mismatch: point has {} features, centroid has {}",
            x.len(),
            c.len()
        )));
    }
    Ok(x.len())
}

/// Product state `⊗_i (cos x_i |0> + sin x_i |1>)`; feature `i` on qubit `i`.
pub fn angle_encode(x: &AngleVector) -> Result<StateVector> {
    let mut state = StateVector::new(x.len())?;
    for (q, &v) in x.as_slice().iter().enumerate() {
        state.apply_ry(q, 2.0 * v)?;
    }
    Ok(state)
}

/// Writes the L2-normalized vector into the amplitudes of a
/// `ceil(log2 N)`-qubit register, zero-padding to the next power of two.
pub fn amplitude_encode(x: &[f64]) -> Result<StateVector> {
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Encoding {
            index,
            reason: "non-finite feature".into(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Encoding {
            index: 0,
            reason: "cannot amplitude-encode an all-zero vector".into(),
        });
    }
    let len = x.len().next_power_of_two().max(2);
    let mut amps = vec![Complex64::new(0.0, 0.0); len];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v / norm, 0.0);
    }
    StateVector::from_amplitudes(amps)
}

/// Number of qubits the swap-test circuit uses for `n_features` features.
pub fn swap_test_qubits(n_features: usize) -> usize {
    2 * n_features + 1
}

/// Number of qubits the kernel circuit uses for `n_features` features.
pub fn kernel_qubits(n_features: usize) -> usize {
    n_features
}

/// Runs the swap-test circuit up to (not including) measurement.
///
/// Layout: ancilla on qubit 0, the point on qubits `1..=N`, the centroid on
/// qubits `N+1..=2N`.
pub fn swap_test_circuit(x: &AngleVector, c: &AngleVector) -> Result<StateVector> {
    let n = check_dims(x, c)?;
    let total = swap_test_qubits(n);
    if total > MAX_QUBITS {
        return Err(Error::Config(format!(
            "swap test on {n} features needs {total} qubits (max {MAX_QUBITS})"
        )));
    }
    let mut state = StateVector::new(total)?;
    let ancilla = 0;
    state.apply_hadamard(ancilla)?;
    for i in 0..n {
        state.apply_ry(1 + i, 2.0 * x.as_slice()[i])?;
        state.apply_ry(1 + n + i, 2.0 * c.as_slice()[i])?;
    }
    for i in 0..n {
        state.apply_cswap(ancilla, 1 + i, 1 + n + i)?;
    }
    state.apply_hadamard(ancilla)?;
    Ok(state)
}

/// Exact probability that the swap-test ancilla reads `0`.
pub fn swap_test_p0(x: &AngleVector, c: &AngleVector) -> Result<f64> {
    swap_test_circuit(x, c)?.prob_zero(0)
}

/// Squared overlap estimated by the swap test as `2 P(0) - 1`.
pub fn swap_test_fidelity(
    x: &AngleVector,
    c: &AngleVector,
    mode: FidelityMode,
) -> Result<Fidelity> {
    mode.validate()?;
    let state = swap_test_circuit(x, c)?;
    let p0 = match mode {
        FidelityMode::Exact => state.prob_zero(0)?,
        FidelityMode::Sampled { shots, seed } => {
            let zeros = state.sample_zero_counts(0, shots, pair_seed(seed, x, c))?;
            zeros as f64 / shots as f64
        }
    };
    Ok(Fidelity::new(2.0 * p0 - 1.0))
}

/// Runs `U†(c) U(x)` on `|0...0>`, one qubit per feature.
pub fn kernel_circuit(x: &AngleVector, c: &AngleVector) -> Result<StateVector> {
    let n = check_dims(x, c)?;
    let mut state = StateVector::new(kernel_qubits(n))?;
    for q in 0..n {
        state.apply_ry(q, 2.0 * x.as_slice()[q])?;
        state.apply_ry(q, -2.0 * c.as_slice()[q])?;
    }
    Ok(state)
}

/// Kernel similarity read from the all-zeros outcome.
pub fn kernel_fidelity(x: &AngleVector, c: &AngleVector, mode: FidelityMode) -> Result<Fidelity> {
    kernel_fidelity_with(x, c, mode, KernelMeasurement::AllZeros)
}

pub fn kernel_fidelity_with(
    x: &AngleVector,
    c: &AngleVector,
    mode: FidelityMode,
    measurement: KernelMeasurement,
) -> Result<Fidelity> {
    mode.validate()?;
    let state = kernel_circuit(x, c)?;
    let p = match (mode, measurement) {
        (FidelityMode::Exact, KernelMeasurement::AllZeros) => state.prob_all_zero(),
        (FidelityMode::Exact, KernelMeasurement::FirstQubit) => state.prob_zero(0)?,
        (FidelityMode::Sampled { shots, seed }, m) => {
            let seed = pair_seed(seed, x, c);
            let hits = match m {
                KernelMeasurement::AllZeros => state.sample_all_zero_counts(shots, seed)?,
                KernelMeasurement::FirstQubit => state.sample_zero_counts(0, shots, seed)?,
            };
            hits as f64 / shots as f64
        }
    };
    Ok(Fidelity::new(p))
}

/// Closed-form overlap of two angle-encoded product states:
/// `prod_i cos^2(x_i - c_i)`.
pub fn analytic_fidelity(x: &AngleVector, c: &AngleVector) -> Result<Fidelity> {
    check_dims(x, c)?;
    let f = x
        .as_slice()
        .iter()
        .zip(c.as_slice())
        .map(|(a, b)| (a - b).cos().powi(2))
        .product();
    Ok(Fidelity::new(f))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-pair sampling seed so that results do not depend on evaluation order.
pub fn pair_seed(seed: u64, x: &AngleVector, c: &AngleVector) -> u64 {
    let mut h = splitmix64(seed);
    for v in x.as_slice().iter().chain(c.as_slice()) {
        h = splitmix64(h ^ v.to_bits());
    }
    h
}
