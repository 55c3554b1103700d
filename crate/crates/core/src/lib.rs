//! Numerical laboratory for random-potential Schrödinger scattering.
//!
//! The crate synthesizes microlocally isotropic Gaussian random potentials,
//! solves the direct scattering problem through a truncated-kernel
//! Lippmann–Schwinger solver (with Born expansions and far-field evaluation),
//! and reconstructs the micro-correlation strength from single-realization
//! backscattered far-field correlations. Supporting modules probe resolvent
//! norm laws, analytic-continuation band discrepancies, and the ergodic band
//! statistics that control single-realization stability.
//!
//! Module map:
//! - [`gridfield`]: grids, strength presets, potential synthesis, covariance checks
//! - [`forward`]: free-resolvent convolution, Krylov/Born solves, far fields
//! - [`specband`]: resolvent-norm probes, Neumann threshold, slab continuation
//! - [`inverse`]: band correlations, strength reconstruction, stability experiment
//! - [`ergodic`]: band statistics, covariance decay, exceedance harness
//! - [`datastore`]: bit-exact FFPK containers and experiment configuration
//! - [`pipeline`]: the end-to-end runs exposed by the `scatterlab` CLI

pub mod dataset;
pub mod datastore;
pub mod ergodic;
pub mod error;
pub mod fft;
pub mod forward;
pub mod gridfield;
pub mod inverse;
pub mod pipeline;
pub mod quad;
pub mod report;
pub mod rng;
pub mod specband;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
