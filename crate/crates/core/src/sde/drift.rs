use std::sync::Arc;

use crate::analytic::DriftValues;
use crate::fields::smooth::{Axis, GradientField, LinearField, SharedField};
use crate::params::PhysicalParams;

/// The four drift fields `b`, `b*`, `b̃`, `b̃*`.
#[derive(Debug, Clone)]
pub struct DriftSet {
    pub b: SharedField,
    pub b_star: SharedField,
    pub b_tilde: SharedField,
    pub b_tilde_star: SharedField,
}

impl DriftSet {
    /// Equilibrium drifts of the harmonic oscillator (all linear).
    pub fn equilibrium(params: &PhysicalParams) -> Self {
        let f = params.thermal_factors();
        let w = params.omega();
        let b = LinearField::new(-w * f.coth_half, w * f.csch_half);
        let b_tilde_star = LinearField::new(-w * f.csch_half, w * f.coth_half);
        let neg = |l: LinearField| LinearField::new(-l.coeff_x, -l.coeff_x_tilde);
        DriftSet {
            b: Arc::new(b),
            b_star: Arc::new(neg(b)),
            b_tilde: Arc::new(neg(b_tilde_star)),
            b_tilde_star: Arc::new(b_tilde_star),
        }
    }

    /// `b = (ħ/m)∂(R+S)`, `b* = −(ħ/m)∂(R−S)`, `b̃ = (ħ/m)∂̃(R−S)`,
    /// `b̃* = −(ħ/m)∂̃(R+S)`.
    pub fn from_rs(r: SharedField, s: SharedField, params: &PhysicalParams) -> Self {
        let k = params.diffusion();
        let grad = |axis, wr: f64, ws: f64| -> SharedField {
            Arc::new(GradientField {
                axis,
                parts: vec![(wr * k, r.clone()), (ws * k, s.clone())],
            })
        };
        DriftSet {
            b: grad(Axis::X, 1.0, 1.0),
            b_star: grad(Axis::X, -1.0, 1.0),
            b_tilde: grad(Axis::XTilde, 1.0, -1.0),
            b_tilde_star: grad(Axis::XTilde, -1.0, -1.0),
        }
    }

    /// All four drifts identically zero.
    pub fn zero() -> Self {
        let z: SharedField = Arc::new(LinearField::zero());
        DriftSet {
            b: z.clone(),
            b_star: z.clone(),
            b_tilde: z.clone(),
            b_tilde_star: z,
        }
    }

    pub fn eval(&self, x: f64, x_tilde: f64) -> DriftValues {
        DriftValues {
            b: self.b.value(x, x_tilde),
            b_star: self.b_star.value(x, x_tilde),
            b_tilde: self.b_tilde.value(x, x_tilde),
            b_tilde_star: self.b_tilde_star.value(x, x_tilde),
        }
    }
}
