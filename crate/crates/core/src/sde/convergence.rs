//! Time-step bias of the stationary variance under the explicit Euler
//! forward-group scheme.
//!
//! At equilibrium the scheme is linear with drift matrix
//! `(ω/s)·[[−c, 1], [1, −c]]` (`c = cosh(β̄/2)`, `s = sinh(β̄/2)`), whose
//! eigenmodes `(x ± x̃)/√2` decay at rates `λ₁ = −(ω/s)(c − 1)` and
//! `λ₂ = −(ω/s)(c + 1)`. Euler inflates each mode's stationary variance from
//! `σ²/(−2λ)` to `σ²/(−λ(2 + λ dt))`.
//!
//! The Monte Carlo estimator couples each Euler path to an exactly
//! discretised path driven by the same Gaussian draws and averages the
//! difference of `x²`, which cancels almost all sampling noise.

use super::drift::DriftSet;
use super::rng::{PathNoise, Purpose};
use super::sample::sample_stationary;
use super::step::{check_dt, Group, Stepper};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::stats::Estimate;
use rayon::prelude::*;

fn modes(params: &PhysicalParams) -> Result<[f64; 2]> {
    if params.is_zero_temperature() {
        return Err(Error::invalid("beta", "mode rates need a finite temperature"));
    }
    let h = 0.5 * params.beta_bar();
    let (c, s) = (h.cosh(), h.sinh());
    let w = params.omega();
    Ok([-(w / s) * (c - 1.0), -(w / s) * (c + 1.0)])
}

/// Stationary `Var[x]` of the Euler scheme minus the exact value.
pub fn analytic_euler_variance_bias(params: &PhysicalParams, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    let sigma2 = params.diffusion();
    let bias: f64 = modes(params)?
        .iter()
        .map(|&l| {
            if 1.0 + l * dt <= -1.0 {
                f64::INFINITY
            } else {
                sigma2 * dt / (2.0 * (2.0 + l * dt))
            }
        })
        .sum();
    // Var[x] = (V₁ + V₂)/2
    Ok(0.5 * bias)
}

/// Monte Carlo estimate of the stationary `Var[x]` bias at step `dt`.
///
/// Each path starts from an exact stationary draw and runs for `horizon`;
/// `x_Euler² − x_exact²` is averaged over the second half. The standard
/// error is over paths.
pub fn euler_variance_bias(
    params: &PhysicalParams,
    dt: f64,
    horizon: f64,
    n_paths: usize,
    base_seed: u64,
) -> Result<Estimate> {
    check_dt(dt)?;
    if n_paths < 2 {
        return Err(Error::InsufficientSamples(format!("{n_paths} paths, need at least 2")));
    }
    let drifts = DriftSet::equilibrium(params);
    let stepper = Stepper::new(&drifts, Group::Forward, dt, params);
    let sigma2 = params.diffusion();
    let exact: Vec<(f64, f64)> = modes(params)?
        .iter()
        .map(|&l| {
            let decay = (l * dt).exp();
            let amp = (sigma2 * (-(2.0 * l * dt).exp_m1()) / (-2.0 * l)).sqrt();
            (decay, amp)
        })
        .collect();
    let n_steps = (horizon / dt + 1e-9).floor() as usize;
    let start = n_steps / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;

    let per_path: Vec<Result<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|index| {
            let p0 = sample_stationary(params, &mut PathNoise::new(base_seed, Purpose::Initial, index));
            let mut noise = PathNoise::new(base_seed, Purpose::Dynamics, index);
            let mut euler = p0;
            let (mut y1, mut y2) = (r * (p0.x + p0.x_tilde), r * (p0.x - p0.x_tilde));
            let mut acc = 0.0;
            for k in 1..=n_steps {
                let (a, b) = noise.normals();
                euler = stepper.advance(&euler, a, b).map_err(|_| Error::Diverged { path: index, step: k })?;
                y1 = exact[0].0 * y1 + exact[0].1 * r * (a + b);
                y2 = exact[1].0 * y2 + exact[1].1 * r * (a - b);
                if k > start {
                    let x = r * (y1 + y2);
                    acc += euler.x * euler.x - x * x;
                }
            }
            Ok(acc / (n_steps - start).max(1) as f64)
        })
        .collect();
    let values = per_path.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate::new(mean, (var / n).sqrt()))
}
