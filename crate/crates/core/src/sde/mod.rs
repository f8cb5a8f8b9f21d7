//! Stochastic integrators for the grouped forward/backward equations and the
//! transformed-coordinate process, exact stationary sampling, and seeded
//! ensembles.

pub mod convergence;
mod drift;
mod ensemble;
mod rng;
mod sample;
mod step;
mod transformed;

pub use drift::DriftSet;
pub use ensemble::{simulate_ensemble, simulate_path, Dynamics, Ensemble, EnsembleConfig, Init, Path};
pub use rng::{wiener_increment, PathNoise, Purpose};
pub use sample::sample_stationary;
pub use step::{
    advance_backward_group, advance_forward_group, step_backward_group, step_forward_group, Group,
    DIVERGENCE_FACTOR,
};
pub use transformed::{
    advance_transformed, classical_noise_ratio, inverse_transform, noise_variance_rate,
    step_transformed, transform_coordinates, transformed_stationary_covariance,
};
