//! Single-realization inversion: band correlations of backscattered far
//! fields, low-pass reconstruction of the micro-correlation strength, the
//! data discrepancy, and the stability experiment harness.

mod correlation;
mod discrepancy;
mod reconstruct;
mod stability;

pub use correlation::{band_correlation, estimate_hhat, find_direction, HhatSamples};
pub use discrepancy::{data_discrepancy, default_tau_grid, epsilon_band};
pub use reconstruct::{
    exact_hhat_samples, l2_norm_on_grid, reconstruct_strength, ReconstructionResult,
};
pub use stability::{
    beta2_from_sobolev, stability_experiment, stability_rhs, ExperimentBandRow,
    ExperimentReport,
};
