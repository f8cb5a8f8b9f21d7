//! Temperature-dependent coordinates `X = √(1+n) x − √n x̃`,
//! `X̃ = √(1+n) x̃ − √n x` and their Ornstein-Uhlenbeck dynamics
//!
//! ```text
//! dX = −ωX dt + √(ħ(1+n)/m) dW − √(ħn/m) dW̃
//! ```
//!
//! `X̃` carries the drift `+ωX̃` in forward time, so it is marched in its own
//! reversed time, where the mirrored equation
//! `dX̃ = −ωX̃ dt + √(ħ(1+n)/m) dW̃ − √(ħn/m) dW` is stable. Both use the same
//! two draws per step.

use super::rng::PathNoise;
use super::step::{check_dt, divergence_limit, guard};
use crate::analytic::{ground_state_variance, StationaryCovariance};
use crate::error::Result;
use crate::params::{thermal_occupation, PhysicalParams, ThermalPoint};

/// `(X, X̃)` from `(x, x̃)`.
pub fn transform_coordinates(point: &ThermalPoint, params: &PhysicalParams) -> (f64, f64) {
    let n = thermal_occupation(params);
    let (a, b) = ((1.0 + n).sqrt(), n.sqrt());
    (a * point.x - b * point.x_tilde, a * point.x_tilde - b * point.x)
}

/// `(x, x̃)` from `(X, X̃)`; the map has unit determinant.
pub fn inverse_transform(big_x: f64, big_x_tilde: f64, params: &PhysicalParams) -> (f64, f64) {
    let n = thermal_occupation(params);
    let (a, b) = ((1.0 + n).sqrt(), n.sqrt());
    (a * big_x + b * big_x_tilde, a * big_x_tilde + b * big_x)
}

/// Noise variance per unit time of `X`: `(ħ/m)(1 + 2n)`.
pub fn noise_variance_rate(params: &PhysicalParams) -> f64 {
    params.diffusion() * (1.0 + 2.0 * thermal_occupation(params))
}

/// [`noise_variance_rate`] relative to the classical Langevin value
/// `2kT/(mω)`; equals `(β̄/2)·coth(β̄/2)` and tends to 1 at high temperature.
pub fn classical_noise_ratio(params: &PhysicalParams) -> f64 {
    let classical = 2.0 * params.thermal_energy() / (params.mass() * params.omega());
    noise_variance_rate(params) / classical
}

/// Stationary covariance of the transformed process:
/// `Var = (ħ/2mω)(1+2n)`, `Cov[X, X̃] = −(ħ/2mω)/sinh(β̄/2)`.
pub fn transformed_stationary_covariance(params: &PhysicalParams) -> StationaryCovariance {
    let f = params.thermal_factors();
    let unit = ground_state_variance(params);
    StationaryCovariance {
        var_x: unit * f.coth_half,
        var_x_tilde: unit * f.coth_half,
        cov_xxt: -unit * f.csch_half,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TransformedStepper {
    decay: f64,
    direct: f64,
    cross: f64,
    limit: f64,
}

impl TransformedStepper {
    pub(crate) fn new(params: &PhysicalParams, dt: f64) -> Self {
        let n = thermal_occupation(params);
        let k = params.diffusion() * dt;
        TransformedStepper {
            decay: 1.0 - params.omega() * dt,
            direct: (k * (1.0 + n)).sqrt(),
            cross: (k * n).sqrt(),
            limit: divergence_limit(params),
        }
    }

    #[inline]
    pub(crate) fn advance(&self, x: f64, y: f64, xi: f64, xi_tilde: f64) -> Result<(f64, f64)> {
        let nx = self.decay * x + self.direct * xi - self.cross * xi_tilde;
        let ny = self.decay * y + self.direct * xi_tilde - self.cross * xi;
        guard(nx, ny, self.limit)?;
        Ok((nx, ny))
    }
}

/// One step with explicit Wiener increments `dW`, `dW̃` (variance `dt`).
pub fn advance_transformed(
    big_x: f64,
    big_x_tilde: f64,
    dt: f64,
    params: &PhysicalParams,
    dw: f64,
    dw_tilde: f64,
) -> Result<(f64, f64)> {
    check_dt(dt)?;
    let s = dt.sqrt();
    TransformedStepper::new(params, dt).advance(big_x, big_x_tilde, dw / s, dw_tilde / s)
}

pub fn step_transformed(
    big_x: f64,
    big_x_tilde: f64,
    dt: f64,
    params: &PhysicalParams,
    noise: &mut PathNoise,
) -> Result<(f64, f64)> {
    check_dt(dt)?;
    let (a, b) = noise.normals();
    TransformedStepper::new(params, dt).advance(big_x, big_x_tilde, a, b)
}
