//! Physical parameters, sample points and the closed-form thermal scalars
//! (Bose occupation, partition function, hyperbolic factors) every other
//! module is written in terms of.

use crate::error::{Error, Result};

/// Mass, angular frequency, action quantum and inverse temperature.
///
/// `beta = f64::INFINITY` is a first-class value meaning zero temperature.
/// All thermal formulas depend only on the dimensionless `β̄ = ħωβ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    omega: f64,
    hbar: f64,
    beta: f64,
}

impl Default for PhysicalParams {
    /// Unit mass, frequency and ħ at `β̄ = 1`.
    fn default() -> Self {
        PhysicalParams {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
            beta: 1.0,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

impl PhysicalParams {
    pub fn new(mass: f64, omega: f64, hbar: f64, beta: f64) -> Result<Self> {
        let beta = if beta == f64::INFINITY {
            beta
        } else {
            positive("beta", beta)?
        };
        Ok(PhysicalParams {
            mass: positive("mass", mass)?,
            omega: positive("omega", omega)?,
            hbar: positive("hbar", hbar)?,
            beta,
        })
    }

    /// Unit mass, frequency and ħ at the given `β̄` (which may be `+∞`).
    pub fn from_beta_bar(beta_bar: f64) -> Result<Self> {
        PhysicalParams::default().with_beta_bar(beta_bar)
    }

    pub fn zero_temperature() -> Self {
        PhysicalParams {
            beta: f64::INFINITY,
            ..PhysicalParams::default()
        }
    }

    /// Same mechanical parameters, temperature set through `β̄`.
    pub fn with_beta_bar(self, beta_bar: f64) -> Result<Self> {
        if beta_bar.is_nan() || beta_bar <= 0.0 {
            return Err(Error::invalid("beta_bar", format!("must be > 0, got {beta_bar}")));
        }
        let beta = beta_bar / (self.hbar * self.omega);
        PhysicalParams::new(self.mass, self.omega, self.hbar, beta)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_bar(&self) -> f64 {
        self.hbar * self.omega * self.beta
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta == f64::INFINITY
    }

    /// `kT = 1/β`; zero at zero temperature.
    pub fn thermal_energy(&self) -> f64 {
        1.0 / self.beta
    }

    /// Oscillator length `sqrt(ħ/mω)`.
    pub fn length_scale(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    /// Noise variance rate `ħ/m` of every Wiener term.
    pub fn diffusion(&self) -> f64 {
        self.hbar / self.mass
    }

    pub fn thermal_factors(&self) -> ThermalFactors {
        ThermalFactors::at(self.beta_bar())
    }
}

/// `coth(β̄/2)`, `1/sinh(β̄/2)` and `n = 1/(e^β̄ − 1)`, evaluated through
/// `q = e^{−β̄}` so that neither large `β̄` nor `β̄ = ∞` overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFactors {
    pub coth_half: f64,
    pub csch_half: f64,
    pub occupation: f64,
}

impl ThermalFactors {
    pub fn at(beta_bar: f64) -> Self {
        if beta_bar == f64::INFINITY {
            return ThermalFactors {
                coth_half: 1.0,
                csch_half: 0.0,
                occupation: 0.0,
            };
        }
        let q = (-beta_bar).exp();
        // 1 − e^{−β̄} without cancellation at small β̄
        let one_minus_q = -(-beta_bar).exp_m1();
        ThermalFactors {
            coth_half: (1.0 + q) / one_minus_q,
            csch_half: 2.0 * (-0.5 * beta_bar).exp() / one_minus_q,
            occupation: q / one_minus_q,
        }
    }
}

/// Bose occupation `n = 1/(e^{β̄} − 1)`; zero at zero temperature.
pub fn thermal_occupation(params: &PhysicalParams) -> f64 {
    params.thermal_factors().occupation
}

/// `Z(β) = 1/(2 sinh(β̄/2))`.
pub fn partition_function(params: &PhysicalParams) -> Result<f64> {
    if params.is_zero_temperature() {
        return Err(Error::ZeroTemperature);
    }
    Ok(0.5 * params.thermal_factors().csch_half)
}

/// One sample of the doubled configuration `(x, x̃)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalPoint {
    pub x: f64,
    pub x_tilde: f64,
    pub t: f64,
}

impl ThermalPoint {
    pub fn new(x: f64, x_tilde: f64, t: f64) -> Self {
        ThermalPoint { x, x_tilde, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.x_tilde.is_finite() && self.t.is_finite()
    }
}

/// Dimensionless coordinates `X = sqrt(mω/ħ)·x`, `X̃ = sqrt(mω/ħ)·x̃`.
pub fn nondimensionalize(point: &ThermalPoint, params: &PhysicalParams) -> (f64, f64) {
    let k = 1.0 / params.length_scale();
    (k * point.x, k * point.x_tilde)
}
