//! Dense statevector simulator.
//!
//! Supports exactly the operations the two fidelity circuits need: Hadamard,
//! RY rotations, controlled SWAP, single-qubit and all-zeros outcome
//! probabilities, and seeded shot sampling.
//!
//! Qubit `0` is the least-significant bit of a basis-state index, so the
//! amplitude of `|q_{n-1} ... q_1 q_0>` lives at `sum_i q_i << i`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 12;

/// Allowed drift of the squared norm away from 1.
pub const NORM_TOL: f64 = 1e-10;

/// Tolerance used when comparing amplitudes or probabilities for equality.
pub const EQ_TOL: f64 = 1e-12;

/// A normalized pure state over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Prepares `|0...0>` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Config(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps an explicit amplitude array. The length must be a power of two
    /// and the squared norm must be 1 within [`NORM_TOL`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Usage(format!(
                "amplitude array length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Usage(format!(
                "amplitudes are not normalized (norm^2 = {norm})"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<usize> {
        if q >= self.n_qubits {
            return Err(Error::Usage(format!(
                "qubit index {q} out of range for {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(1 << q)
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() <= NORM_TOL,
            "norm drifted to {}",
            self.norm_sqr()
        );
    }

    /// Applies a single-qubit real 2x2 matrix `[[m00, m01], [m10, m11]]`.
    fn apply_real_1q(&mut self, mask: usize, m00: f64, m01: f64, m10: f64, m11: f64) {
        for i in 0..self.amps.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let a = self.amps[i];
            let b = self.amps[j];
            self.amps[i] = a * m00 + b * m01;
            self.amps[j] = a * m10 + b * m11;
        }
        self.debug_check_norm();
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        let mask = self.check_qubit(q)?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.apply_real_1q(mask, h, h, h, -h);
        Ok(())
    }

    /// `RY(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        let mask = self.check_qubit(q)?;
        if !theta.is_finite() {
            return Err(Error::Usage(format!("non-finite rotation angle {theta}")));
        }
        let (s, c) = (theta / 2.0).sin_cos();
        self.apply_real_1q(mask, c, -s, s, c);
        Ok(())
    }

    /// Exchanges qubits `a` and `b` on the subspace where `control` is 1.
    pub fn apply_cswap(&mut self, control: usize, a: usize, b: usize) -> Result<()> {
        let mc = self.check_qubit(control)?;
        let ma = self.check_qubit(a)?;
        let mb = self.check_qubit(b)?;
        if control == a || control == b || a == b {
            return Err(Error::Usage(format!(
                "cswap needs distinct qubits, got control={control} a={a} b={b}"
            )));
        }
        for i in 0..self.amps.len() {
            // visit each swapped pair once: control set, a set, b clear
            if i & mc != 0 && i & ma != 0 && i & mb == 0 {
                self.amps.swap(i, i ^ ma ^ mb);
            }
        }
        Ok(())
    }

    /// Probability of measuring qubit `q` in `|0>`.
    pub fn prob_zero(&self, q: usize) -> Result<f64> {
        let mask = self.check_qubit(q)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probability of measuring qubit `q` in `|1>`.
    pub fn prob_one(&self, q: usize) -> Result<f64> {
        let mask = self.check_qubit(q)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probability of the all-zeros outcome, `|<0...0|psi>|^2`.
    pub fn prob_all_zero(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// Number of `0` outcomes on qubit `q` over `shots` repetitions.
    pub fn sample_zero_counts(&self, q: usize, shots: u64, seed: u64) -> Result<u64> {
        let p = self.prob_zero(q)?;
        sample_binomial(p, shots, seed)
    }

    /// Number of all-zeros outcomes over `shots` repetitions.
    pub fn sample_all_zero_counts(&self, shots: u64, seed: u64) -> Result<u64> {
        sample_binomial(self.prob_all_zero(), shots, seed)
    }

    /// `<self|other> = sum_i conj(self_i) * other_i`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Usage(format!(
                "inner product between {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Draws `Binomial(shots, p)` from a ChaCha8 stream seeded with `seed`.
pub fn sample_binomial(p: f64, shots: u64, seed: u64) -> Result<u64> {
    if shots == 0 {
        return Err(Error::Usage("shots must be at least 1".into()));
    }
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p)
        .map_err(|e| Error::Usage(format!("invalid binomial parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(dist.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn assert_amps(state: &StateVector, expected: &[f64]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!(
                (a.re - e).abs() < EQ_TOL && a.im.abs() < EQ_TOL,
                "{a} vs {e}"
            );
        }
    }

    #[test]
    fn ground_states() {
        assert_amps(&StateVector::new(1).unwrap(), &[1.0, 0.0]);
        assert_amps(&StateVector::new(2).unwrap(), &[1.0, 0.0, 0.0, 0.0]);
        let s = StateVector::new(5).unwrap();
        assert_eq!(s.amplitudes().len(), 32);
        assert!((s.norm_sqr() - 1.0).abs() < EQ_TOL);
    }

    #[test]
    fn qubit_count_limits() {
        assert!(matches!(StateVector::new(0), Err(Error::Config(_))));
        assert!(matches!(StateVector::new(13), Err(Error::Config(_))));
        assert!(StateVector::new(12).is_ok());
    }

    #[test]
    fn hadamard_action() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_hadamard(0).unwrap();
        assert_amps(&s, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        s.apply_hadamard(0).unwrap();
        assert_amps(&s, &[1.0, 0.0]);

        let mut one = StateVector::new(1).unwrap();
        one.apply_ry(0, PI).unwrap();
        one.apply_hadamard(0).unwrap();
        assert_amps(&one, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
    }

    #[test]
    fn ry_action() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert_amps(&s, &[0.0, 1.0]);

        let mut s = StateVector::new(1).unwrap();
        s.apply_ry(0, 2.0 * FRAC_PI_4).unwrap();
        assert_amps(&s, &[FRAC_PI_4.cos(), FRAC_PI_4.sin()]);

        let mut s = StateVector::new(2).unwrap();
        s.apply_hadamard(1).unwrap();
        let before = s.clone();
        s.apply_ry(0, 0.0).unwrap();
        assert_eq!(s, before);

        assert!(matches!(s.apply_ry(0, f64::NAN), Err(Error::Usage(_))));
        assert!(matches!(s.apply_ry(2, 0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn cswap_action() {
        // control (qubit 0) inactive
        let mut s = StateVector::new(3).unwrap();
        s.apply_ry(1, 0.7).unwrap();
        s.apply_ry(2, 2.1).unwrap();
        let before = s.clone();
        s.apply_cswap(0, 1, 2).unwrap();
        assert_eq!(s, before);

        // |1> (control) ⊗ |10> on (b=2, a=1) -> |01>
        let mut s = StateVector::new(3).unwrap();
        s.apply_ry(0, PI).unwrap();
        s.apply_ry(2, PI).unwrap();
        assert!((s.amplitudes()[0b101].re - 1.0).abs() < EQ_TOL);
        s.apply_cswap(0, 1, 2).unwrap();
        assert!((s.amplitudes()[0b011].re - 1.0).abs() < EQ_TOL);

        assert!(matches!(s.apply_cswap(0, 0, 2), Err(Error::Usage(_))));
        assert!(matches!(s.apply_cswap(0, 1, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn probabilities() {
        let mut s = StateVector::new(1).unwrap();
        assert_eq!(s.prob_zero(0).unwrap(), 1.0);
        s.apply_hadamard(0).unwrap();
        assert!((s.prob_zero(0).unwrap() - 0.5).abs() < EQ_TOL);

        let mut s = StateVector::new(2).unwrap();
        assert_eq!(s.prob_all_zero(), 1.0);
        s.apply_hadamard(0).unwrap();
        s.apply_hadamard(1).unwrap();
        assert!((s.prob_all_zero() - 0.25).abs() < EQ_TOL);
    }

    #[test]
    fn kernel_circuit_overlap() {
        // U†(c) U(x) |00> with x=(0.3,0.7), c=(0.1,0.9)
        let (x, c) = ([0.3, 0.7], [0.1, 0.9]);
        let mut s = StateVector::new(2).unwrap();
        for q in 0..2 {
            s.apply_ry(q, 2.0 * x[q]).unwrap();
            s.apply_ry(q, -2.0 * c[q]).unwrap();
        }
        let expected = 0.2f64.cos().powi(2) * 0.2f64.cos().powi(2);
        assert!((s.prob_all_zero() - expected).abs() < EQ_TOL);
    }

    #[test]
    fn sampling_edges() {
        let ground = StateVector::new(1).unwrap();
        assert_eq!(ground.sample_zero_counts(0, 100, 7).unwrap(), 100);
        let mut one = StateVector::new(1).unwrap();
        one.apply_ry(0, PI).unwrap();
        assert_eq!(one.sample_zero_counts(0, 100, 7).unwrap(), 0);
        assert!(matches!(
            ground.sample_zero_counts(0, 0, 7),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn sampling_concentrates() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_hadamard(0).unwrap();
        for seed in [0, 1, 42, 12345] {
            let n = s.sample_zero_counts(0, 1_000_000, seed).unwrap();
            assert!((n as f64 / 1e6 - 0.5).abs() < 0.005);
        }
        assert_eq!(
            s.sample_zero_counts(0, 1000, 9).unwrap(),
            s.sample_zero_counts(0, 1000, 9).unwrap()
        );
    }

    #[test]
    fn inner_products() {
        let zero = StateVector::new(1).unwrap();
        let mut one = StateVector::new(1).unwrap();
        one.apply_ry(0, PI).unwrap();
        assert!(zero.inner_product(&one).unwrap().norm() < EQ_TOL);
        assert!((one.inner_product(&one).unwrap().re - 1.0).abs() < EQ_TOL);
        let two = StateVector::new(2).unwrap();
        assert!(matches!(zero.inner_product(&two), Err(Error::Usage(_))));
    }

    #[test]
    fn from_amplitudes_validates() {
        let c = |re| Complex64::new(re, 0.0);
        assert!(StateVector::from_amplitudes(vec![c(0.6), c(0.8)]).is_ok());
        assert!(StateVector::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0), c(0.0), c(0.0)]).is_err());
    }
}
