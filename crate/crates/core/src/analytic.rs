//! Thermal equilibrium of the harmonic oscillator in closed form.
//!
//! The equilibrium thermal-vacuum wavefunction is `Ψ_eq = e^{R_eq}` (up to
//! normalisation) with
//!
//! ```text
//! R_eq(x, x̃) = −(mω/ħ) [(x² + x̃²) cosh(β̄/2) − 2 x x̃] / (2 sinh(β̄/2))
//! ```
//!
//! and vanishing phase `S_eq`. Everything here is exact and serves as the
//! reference for the Monte Carlo and residual machinery.

use std::sync::Arc;

use crate::fields::smooth::{ExpField, Polynomial2D, SharedField};
use crate::params::{PhysicalParams, ThermalFactors};

/// The four drift values `(b, b*, b̃, b̃*)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftValues {
    pub b: f64,
    pub b_star: f64,
    pub b_tilde: f64,
    pub b_tilde_star: f64,
}

impl DriftValues {
    /// Current velocity `v = (b + b*)/2`.
    pub fn current(&self) -> f64 {
        0.5 * (self.b + self.b_star)
    }

    /// Osmotic velocity `u = (b − b*)/2`.
    pub fn osmotic(&self) -> f64 {
        0.5 * (self.b - self.b_star)
    }

    pub fn current_tilde(&self) -> f64 {
        0.5 * (self.b_tilde + self.b_tilde_star)
    }

    pub fn osmotic_tilde(&self) -> f64 {
        0.5 * (self.b_tilde - self.b_tilde_star)
    }
}

/// Second moments of the stationary Gaussian `|Ψ_eq|² = e^{2 R_eq}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryCovariance {
    pub var_x: f64,
    pub var_x_tilde: f64,
    /// Cross moment `E[x x̃]` (the means vanish).
    pub cov_xxt: f64,
}

impl StationaryCovariance {
    /// Lower Cholesky factor `[[l11, 0], [l21, l22]]`.
    ///
    /// `det = var² − cov²` is passed in explicitly by callers that know it in
    /// closed form, since at high temperature it cancels catastrophically.
    pub(crate) fn cholesky_with_det(&self, det: f64) -> (f64, f64, f64) {
        let l11 = self.var_x.sqrt();
        let l21 = self.cov_xxt / l11;
        let l22 = (det / self.var_x).sqrt();
        (l11, l21, l22)
    }

    pub fn correlation(&self) -> f64 {
        self.cov_xxt / (self.var_x * self.var_x_tilde).sqrt()
    }
}

/// `R_eq(x, x̃)`; at zero temperature the limiting form `−(mω/2ħ)(x² + x̃²)`.
pub fn r_eq(x: f64, x_tilde: f64, params: &PhysicalParams) -> f64 {
    let f = params.thermal_factors();
    let kappa = params.mass() * params.omega() / params.hbar();
    -0.5 * kappa * ((x * x + x_tilde * x_tilde) * f.coth_half - 2.0 * x * x_tilde * f.csch_half)
}

/// Equilibrium drifts. `b` and `b̃*` are the closed forms; `b* = −b` and
/// `b̃ = −b̃*` because `S_eq = 0`.
pub fn drift_eq(x: f64, x_tilde: f64, params: &PhysicalParams) -> DriftValues {
    let ThermalFactors {
        coth_half,
        csch_half,
        ..
    } = params.thermal_factors();
    let w = params.omega();
    let b = -w * (x * coth_half - x_tilde * csch_half);
    let b_tilde_star = w * (x_tilde * coth_half - x * csch_half);
    DriftValues {
        b,
        b_star: -b,
        b_tilde: -b_tilde_star,
        b_tilde_star,
    }
}

/// `var = (ħ/2mω) coth(β̄/2)`, `E[x x̃] = (ħ/2mω)/sinh(β̄/2)`.
pub fn stationary_covariance(params: &PhysicalParams) -> StationaryCovariance {
    let f = params.thermal_factors();
    let unit = ground_state_variance(params);
    StationaryCovariance {
        var_x: unit * f.coth_half,
        var_x_tilde: unit * f.coth_half,
        cov_xxt: unit * f.csch_half,
    }
}

/// `ħ/2mω`, also the determinant root `sqrt(var² − cov²)` at every temperature.
pub fn ground_state_variance(params: &PhysicalParams) -> f64 {
    params.hbar() / (2.0 * params.mass() * params.omega())
}

/// `Var[(p − p*)/2] = (mħω/2) coth(β̄/2)`.
pub fn momentum_halfdiff_variance(params: &PhysicalParams) -> f64 {
    0.5 * params.mass() * params.hbar() * params.omega() * params.thermal_factors().coth_half
}

/// `sqrt(Var[x]) sqrt(Var[(p − p*)/2]) = ħ/2 + ħ n`.
pub fn uncertainty_product(params: &PhysicalParams) -> f64 {
    (stationary_covariance(params).var_x * momentum_halfdiff_variance(params)).sqrt()
}

/// Thermal equilibrium of one oscillator, packaged as fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    params: PhysicalParams,
}

impl EquilibriumSolution {
    pub fn new(params: PhysicalParams) -> Self {
        EquilibriumSolution { params }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn r(&self, x: f64, x_tilde: f64) -> f64 {
        r_eq(x, x_tilde, &self.params)
    }

    pub fn s(&self, _x: f64, _x_tilde: f64) -> f64 {
        0.0
    }

    pub fn drifts(&self, x: f64, x_tilde: f64) -> DriftValues {
        drift_eq(x, x_tilde, &self.params)
    }

    pub fn covariance(&self) -> StationaryCovariance {
        stationary_covariance(&self.params)
    }

    pub fn uncertainty_product(&self) -> f64 {
        uncertainty_product(&self.params)
    }

    /// `R_eq` as a quadratic polynomial.
    pub fn r_polynomial(&self) -> Polynomial2D {
        let f = self.params.thermal_factors();
        let kappa = self.params.mass() * self.params.omega() / self.params.hbar();
        Polynomial2D::quadratic(-0.5 * kappa * f.coth_half, kappa * f.csch_half, -0.5 * kappa * f.coth_half)
    }

    pub fn s_polynomial(&self) -> Polynomial2D {
        Polynomial2D::zero()
    }

    /// Normalised density `P = e^{2R_eq} · mω/(πħ)`.
    pub fn density(&self) -> ExpField {
        let log: SharedField = Arc::new(self.r_polynomial().scaled(2.0));
        ExpField {
            log,
            scale: self.params.mass() * self.params.omega() / (std::f64::consts::PI * self.params.hbar()),
        }
    }

    /// Harmonic potential `V(x) = mω²x²/2` (a function of `x` only).
    pub fn potential(&self) -> Polynomial2D {
        Polynomial2D::zero().with_term(2, 0, 0.5 * self.params.mass() * self.params.omega().powi(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::smooth::Field2D;
    use proptest::prelude::*;

    fn unit(bb: f64) -> PhysicalParams {
        PhysicalParams::from_beta_bar(bb).unwrap()
    }

    #[test]
    fn r_eq_values() {
        let p = unit(1.0);
        assert_eq!(r_eq(0.0, 0.0, &p), 0.0);
        assert!((r_eq(1.0, 1.0, &p) + 0.244_918_662_403_709_13).abs() < 1e-14);
        assert!((r_eq(1.0, 0.0, &p) + 1.081_976_706_869_326_4).abs() < 1e-14);
        let z = PhysicalParams::zero_temperature();
        assert!((r_eq(1.0, 2.0, &z) + 2.5).abs() < 1e-15);
    }

    #[test]
    fn drift_values() {
        let p = unit(1.0);
        let d = drift_eq(0.0, 0.0, &p);
        assert!(d.b == 0.0 && d.b_star == 0.0 && d.b_tilde == 0.0 && d.b_tilde_star == 0.0);
        let d = drift_eq(1.0, 0.0, &p);
        assert!((d.b + 2.163_953_413_738_653).abs() < 1e-14);
        assert!((d.b_tilde_star + 1.919_034_751_334_943_7).abs() < 1e-14);
        assert_eq!(d.b_star, -d.b);
        assert_eq!(d.b_tilde, -d.b_tilde_star);
        let z = drift_eq(1.0, 0.7, &PhysicalParams::zero_temperature());
        assert_eq!(z.b, -1.0);
        assert!((z.b_tilde_star - 0.7).abs() < 1e-15);
        // b → −ωx as β̄ → ∞ through large finite values too
        let far = drift_eq(1.0, 0.7, &unit(80.0));
        assert!((far.b + 1.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_values() {
        let c = stationary_covariance(&unit(1.0));
        assert!((c.var_x - 1.081_976_706_869_326_4).abs() < 1e-14);
        assert!((c.cov_xxt - 0.959_517_375_667_471_9).abs() < 1e-14);
        assert_eq!(c.var_x, c.var_x_tilde);
        assert!((stationary_covariance(&unit(3.0)).var_x - 0.552_395_696_491_256).abs() < 1e-14);
        let z = stationary_covariance(&PhysicalParams::zero_temperature());
        assert_eq!((z.var_x, z.cov_xxt), (0.5, 0.0));
    }

    #[test]
    fn uncertainty_values() {
        assert_eq!(uncertainty_product(&PhysicalParams::zero_temperature()), 0.5);
        assert!((uncertainty_product(&unit(1.0)) - 1.081_976_706_869_326_4).abs() < 1e-14);
        assert!((uncertainty_product(&unit(3.0)) - 0.552_395_696_491_256).abs() < 1e-14);
        let p = PhysicalParams::new(2.0, 0.5, 3.0, 0.4).unwrap();
        let n = crate::params::thermal_occupation(&p);
        assert!((uncertainty_product(&p) - (1.5 + 3.0 * n)).abs() < 1e-13);
    }

    /// Independent route: integrate `e^{2R}` and its moments by tensor-product
    /// Simpson quadrature.
    fn quadrature_moments(p: &PhysicalParams) -> (f64, f64, f64) {
        let l = 12.0 * stationary_covariance(p).var_x.sqrt();
        let n = 1200;
        let h = 2.0 * l / n as f64;
        let w = |k: usize| match k {
            0 => 1.0,
            k if k == n => 1.0,
            k if k % 2 == 1 => 4.0,
            _ => 2.0,
        };
        let (mut z, mut xx, mut xy) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let x = -l + i as f64 * h;
            for j in 0..=n {
                let y = -l + j as f64 * h;
                let wt = w(i) * w(j) * (2.0 * r_eq(x, y, p)).exp();
                z += wt;
                xx += wt * x * x;
                xy += wt * x * y;
            }
        }
        let norm = h * h / 9.0;
        (z * norm, xx / z, xy / z)
    }

    #[test]
    fn covariance_matches_quadrature() {
        for bb in [0.5, 1.0, 3.0] {
            let p = unit(bb);
            let c = stationary_covariance(&p);
            let (z, vx, cxy) = quadrature_moments(&p);
            assert!(((vx - c.var_x) / c.var_x).abs() < 1e-6, "β̄={bb}");
            assert!(((cxy - c.cov_xxt) / c.cov_xxt).abs() < 1e-6, "β̄={bb}");
            assert!((z - std::f64::consts::PI).abs() < 1e-6);
        }
    }

    #[test]
    fn density_is_normalised_and_matches_r() {
        let sol = EquilibriumSolution::new(unit(1.0));
        let d = sol.density();
        let v = d.value(0.4, -0.3);
        assert!((v - (2.0 * sol.r(0.4, -0.3)).exp() / std::f64::consts::PI).abs() < 1e-15);
        assert!((sol.r_polynomial().eval(0.4, -0.3) - sol.r(0.4, -0.3)).abs() < 1e-15);
    }

    /// Central differences of `R_eq` reproduce `b = (ħ/m)∂R` at O(h²).
    #[test]
    fn drift_gradient_check_second_order() {
        let p = PhysicalParams::new(1.3, 0.8, 0.9, 1.1).unwrap();
        let k = p.hbar() / p.mass();
        let pts = [(0.3, -1.2), (1.7, 0.4), (-0.9, -0.6)];
        // add a cubic term so the stencil has truncation error to measure
        let cubic = |x: f64, y: f64| r_eq(x, y, &p) + 0.05 * x * x * x * y;
        let cubic_dx = |x: f64, y: f64| drift_eq(x, y, &p).b / k + 0.15 * x * x * y;
        for (x, y) in pts {
            let fd = |h: f64| (r_eq(x + h, y, &p) - r_eq(x - h, y, &p)) / (2.0 * h) * k;
            assert!((fd(1e-3) - drift_eq(x, y, &p).b).abs() < 1e-9);
            let err = |h: f64| ((cubic(x + h, y) - cubic(x - h, y)) / (2.0 * h) - cubic_dx(x, y)).abs();
            let ratio = err(1e-2) / err(1e-2 / 2.0);
            assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        }
    }

    proptest! {
        #[test]
        fn r_eq_symmetric_and_nonpositive(x in -5.0..5.0f64, y in -5.0..5.0f64, bb in 0.05..20.0f64) {
            let p = unit(bb);
            prop_assert!((r_eq(x, y, &p) - r_eq(y, x, &p)).abs() < 1e-12);
            prop_assert!(r_eq(x, y, &p) <= 0.0);
        }

        #[test]
        fn equilibrium_current_velocity_vanishes(x in -5.0..5.0f64, y in -5.0..5.0f64, bb in 0.05..20.0f64) {
            let d = drift_eq(x, y, &unit(bb));
            prop_assert_eq!(d.current(), 0.0);
            prop_assert_eq!(d.current_tilde(), 0.0);
        }

        #[test]
        fn uncertainty_never_below_half(bb in 0.01..200.0f64) {
            let u = uncertainty_product(&unit(bb));
            prop_assert!(u >= 0.5);
            if bb < 30.0 { prop_assert!(u > 0.5); }
        }

        #[test]
        fn covariance_positive_definite(bb in 0.01..200.0f64) {
            let c = stationary_covariance(&unit(bb));
            prop_assert!(c.var_x > c.cov_xxt.abs());
        }
    }
}
