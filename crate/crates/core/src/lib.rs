//! Quantum-simulated K-means variants and classical baselines for
//! clustering vulnerability catalogs.
//!
//! * [`qsim`]: dense statevector simulator
//! * [`encode`]: angle/amplitude encodings and the swap-test and kernel
//!   fidelity circuits
//! * [`cluster`]: K-means with pluggable assignment, spectral clustering,
//!   Jacobi eigensolver, elbow curves
//! * [`metrics`]: silhouette, Davies–Bouldin, Calinski–Harabasz, ARI
//! * [`ingest`]: catalog CSV parsing, label encoding, normalization,
//!   cluster profiles
//! * [`pipeline`], [`report`], [`svg`]: the end-to-end runs behind the CLI

pub mod cluster;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod qsim;
pub mod report;
pub mod svg;

pub use dataset::{Dataset, NormalizationRange};
pub use error::{Error, Result};
