//! Grids, strength-field presets, potential synthesis, and covariance checks.
//!
//! The random potential is built as `V = sqrt(h) * G` where `G` is white
//! noise filtered by `|xi|^{-m/2}` on the periodic lattice, so the exact
//! lattice covariance is `K_V(x, y) = sqrt(h(x) h(y)) * G_m(x - y)` with
//! `G_m` the lattice Green's sum of `|xi|^{-m}`. The grid box is kept at
//! least twice the support diameter so periodization leakage is negligible
//! at supported separations.

mod covariance;
mod grid;
mod noise;
mod strength;
mod synthesis;

pub use covariance::{
    empirical_covariance, kernel_singular_part, lattice_greens_sum_bruteforce,
    lattice_greens_table, periodization_leakage, radial_fourier_constant, CovarianceProbe,
};
pub use grid::{make_grid, GridSpec3};
pub use noise::sample_white_noise;
pub use strength::{
    exact_hhat, preset_value, strength_preset, PresetDescriptor, PresetId, StrengthField,
};
pub use synthesis::{
    apply_spectral_filter, apply_symbol_filter, synthesize_potential, PotentialRealization,
};
