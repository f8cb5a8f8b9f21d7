//! Explicit Euler steps of the two grouped pairs.
//!
//! The forward group pairs the forward equation for `x`,
//! `dx = b dt + √(ħ/m) dW`, with the backward-form equation for `x̃`,
//! `dx̃ = b̃* dt + √(ħ/m) dW̃*`. A step advances `x` from `t` to `t + dt`
//! and marches `x̃` along its own (reversed) time direction:
//!
//! ```text
//! x'  = x + b(x, x̃)·dt  + √(ħ/m)·dW
//! x̃' = x̃ − b̃*(x, x̃)·dt + √(ħ/m)·dW̃
//! ```
//!
//! The backward group mirrors this with `(b*, b̃)` and decreasing `t`:
//! `x' = x − b*·dt + √(ħ/m)dW`, `x̃' = x̃ + b̃·dt + √(ħ/m)dW̃`.
//!
//! Drifts are evaluated at the known point. For the equilibrium drifts both
//! groups relax to the stationary Gaussian with an `O(dt)` variance bias.

use super::drift::DriftSet;
use super::rng::PathNoise;
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, ThermalPoint};

/// Paths leaving `|x| ≤ DIVERGENCE_FACTOR·sqrt(ħ/mω)` count as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Group {
    #[default]
    Forward,
    Backward,
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("dt", format!("must be positive and finite, got {dt}")))
    }
}

pub(crate) fn divergence_limit(params: &PhysicalParams) -> f64 {
    DIVERGENCE_FACTOR * params.length_scale()
}

#[inline]
pub(crate) fn guard(a: f64, b: f64, limit: f64) -> Result<()> {
    // NaN fails both comparisons
    if a.abs() <= limit && b.abs() <= limit {
        Ok(())
    } else {
        Err(Error::StepDiverged)
    }
}

/// One integrator configuration with everything per-step precomputed.
#[derive(Debug, Clone)]
pub(crate) struct Stepper<'a> {
    drifts: &'a DriftSet,
    group: Group,
    dt: f64,
    amplitude: f64,
    limit: f64,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(drifts: &'a DriftSet, group: Group, dt: f64, params: &PhysicalParams) -> Self {
        Stepper {
            drifts,
            group,
            dt,
            amplitude: (params.diffusion() * dt).sqrt(),
            limit: divergence_limit(params),
        }
    }

    /// Advances with standard-normal draws `(ξ, ξ̃)`.
    #[inline]
    pub(crate) fn advance(&self, p: &ThermalPoint, xi: f64, xi_tilde: f64) -> Result<ThermalPoint> {
        let (x, y, dt) = (p.x, p.x_tilde, self.dt);
        let (dx, dy, t) = match self.group {
            Group::Forward => (
                self.drifts.b.value(x, y) * dt,
                -self.drifts.b_tilde_star.value(x, y) * dt,
                p.t + dt,
            ),
            Group::Backward => (
                -self.drifts.b_star.value(x, y) * dt,
                self.drifts.b_tilde.value(x, y) * dt,
                p.t - dt,
            ),
        };
        let nx = x + dx + self.amplitude * xi;
        let ny = y + dy + self.amplitude * xi_tilde;
        guard(nx, ny, self.limit)?;
        Ok(ThermalPoint::new(nx, ny, t))
    }
}

/// Forward-group step with explicit Wiener increments `dW`, `dW̃` (variance `dt`).
pub fn advance_forward_group(
    point: &ThermalPoint,
    dt: f64,
    drifts: &DriftSet,
    params: &PhysicalParams,
    dw: f64,
    dw_tilde: f64,
) -> Result<ThermalPoint> {
    advance(point, dt, drifts, params, Group::Forward, dw, dw_tilde)
}

/// Backward-group step with explicit Wiener increments.
pub fn advance_backward_group(
    point: &ThermalPoint,
    dt: f64,
    drifts: &DriftSet,
    params: &PhysicalParams,
    dw: f64,
    dw_tilde: f64,
) -> Result<ThermalPoint> {
    advance(point, dt, drifts, params, Group::Backward, dw, dw_tilde)
}

fn advance(
    point: &ThermalPoint,
    dt: f64,
    drifts: &DriftSet,
    params: &PhysicalParams,
    group: Group,
    dw: f64,
    dw_tilde: f64,
) -> Result<ThermalPoint> {
    check_dt(dt)?;
    let s = dt.sqrt();
    Stepper::new(drifts, group, dt, params).advance(point, dw / s, dw_tilde / s)
}

pub fn step_forward_group(
    point: &ThermalPoint,
    dt: f64,
    drifts: &DriftSet,
    params: &PhysicalParams,
    noise: &mut PathNoise,
) -> Result<ThermalPoint> {
    check_dt(dt)?;
    let (a, b) = noise.normals();
    Stepper::new(drifts, Group::Forward, dt, params).advance(point, a, b)
}

pub fn step_backward_group(
    point: &ThermalPoint,
    dt: f64,
    drifts: &DriftSet,
    params: &PhysicalParams,
    noise: &mut PathNoise,
) -> Result<ThermalPoint> {
    check_dt(dt)?;
    let (a, b) = noise.normals();
    Stepper::new(drifts, Group::Backward, dt, params).advance(point, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drift_zero_noise_is_identity() {
        let p = PhysicalParams::default();
        let pt = ThermalPoint::new(0.3, -1.1, 2.0);
        let z = DriftSet::zero();
        let f = advance_forward_group(&pt, 0.01, &z, &p, 0.0, 0.0).unwrap();
        assert_eq!((f.x, f.x_tilde), (pt.x, pt.x_tilde));
        assert!((f.t - 2.01).abs() < 1e-15);
        let b = advance_backward_group(&pt, 0.01, &z, &p, 0.0, 0.0).unwrap();
        assert_eq!((b.x, b.x_tilde), (pt.x, pt.x_tilde));
        assert!((b.t - 1.99).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_groups_take_identical_spatial_steps() {
        let p = PhysicalParams::from_beta_bar(1.0).unwrap();
        let d = DriftSet::equilibrium(&p);
        let pt = ThermalPoint::new(0.8, -0.2, 0.0);
        let f = advance_forward_group(&pt, 0.01, &d, &p, 0.05, -0.02).unwrap();
        let b = advance_backward_group(&pt, 0.01, &d, &p, 0.05, -0.02).unwrap();
        assert_eq!((f.x, f.x_tilde), (b.x, b.x_tilde));
        let v = d.eval(pt.x, pt.x_tilde);
        assert_eq!(v.b_star, -v.b);
        assert_eq!(v.b_tilde, -v.b_tilde_star);
    }

    #[test]
    fn drift_and_noise_enter_as_documented() {
        let p = PhysicalParams::new(2.0, 1.0, 0.5, 1.0).unwrap();
        let d = DriftSet::equilibrium(&p);
        let pt = ThermalPoint::new(1.0, 0.5, 0.0);
        let v = d.eval(pt.x, pt.x_tilde);
        let (dt, dw, dwt) = (0.01, 0.1, -0.2);
        let f = advance_forward_group(&pt, dt, &d, &p, dw, dwt).unwrap();
        let s = (0.5f64 / 2.0).sqrt();
        assert!((f.x - (1.0 + v.b * dt + s * dw)).abs() < 1e-14);
        assert!((f.x_tilde - (0.5 - v.b_tilde_star * dt + s * dwt)).abs() < 1e-14);
    }

    #[test]
    fn divergence_and_bad_dt_are_errors() {
        let p = PhysicalParams::default();
        let d = DriftSet::equilibrium(&p);
        let far = ThermalPoint::new(2e6, 0.0, 0.0);
        assert_eq!(
            advance_forward_group(&far, 0.01, &d, &p, 0.0, 0.0),
            Err(Error::StepDiverged)
        );
        let nan = ThermalPoint::new(f64::NAN, 0.0, 0.0);
        assert!(advance_backward_group(&nan, 0.01, &d, &p, 0.0, 0.0).is_err());
        assert!(advance_forward_group(&ThermalPoint::default(), 0.0, &d, &p, 0.0, 0.0).is_err());
        assert_eq!(Error::StepDiverged.to_string(), "path diverged; reduce dt");
    }
}
