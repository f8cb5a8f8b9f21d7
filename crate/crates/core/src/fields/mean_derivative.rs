//! Empirical check of the hybrid mean derivative
//! `D̄f = ∂f/∂t + b·∂f + b̃*·∂̃f + (ħ/2m)(∂² − ∂̃²)f`.
//!
//! From each ensemble point one forward-group step is drawn. Conditioned on
//! the start `(x, x̃)`, the increment `[f(x', x̃) − f(x, x̃')]/dt` has mean
//! `D̄f` up to `O(dt)`: the `x` half moves forward with drift `b`, the `x̃`
//! half moves along its reversed time with drift `−b̃*`, and the two
//! diffusion terms enter with opposite signs.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

use super::smooth::Field2D;
use crate::analytic::stationary_covariance;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::sde::{DriftSet, Ensemble, PathNoise, Purpose};
use crate::stats::Estimate;

/// Cells with fewer samples are skipped.
pub const MIN_CELL_SAMPLES: u64 = 100;

/// Cell width in units of `sqrt(var_x)`.
pub const CELL_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEstimate {
    pub center: (f64, f64),
    pub samples: u64,
    pub empirical: Estimate,
    /// `D̄f` averaged over the cell's samples.
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanDerivativeReport {
    pub cells: Vec<CellEstimate>,
    pub cell_width: f64,
}

impl MeanDerivativeReport {
    /// Cell with the largest `|z|`.
    pub fn worst(&self) -> &CellEstimate {
        self.cells
            .iter()
            .max_by(|a, b| a.z.total_cmp(&b.z))
            .expect("report has at least one cell")
    }

    /// Cell containing `(x, x̃)`, if it was retained.
    pub fn cell_at(&self, x: f64, x_tilde: f64) -> Option<&CellEstimate> {
        let key = cell_key(x, x_tilde, self.cell_width);
        self.cells
            .iter()
            .find(|c| cell_key(c.center.0, c.center.1, self.cell_width) == key)
    }

    /// Two-sided `|z|` threshold holding the family-wise error rate at
    /// `alpha` over all reported cells (Bonferroni).
    pub fn bonferroni_threshold(&self, alpha: f64) -> f64 {
        let per_cell = alpha / self.cells.len() as f64;
        Normal::standard().inverse_cdf(1.0 - 0.5 * per_cell)
    }
}

fn cell_key(x: f64, x_tilde: f64, w: f64) -> (i64, i64) {
    ((x / w).round() as i64, (x_tilde / w).round() as i64)
}

#[derive(Default)]
struct CellSums {
    n: u64,
    sum: f64,
    sum_sq: f64,
    analytic: f64,
}

/// `D̄f` at a point from closed-form derivatives.
pub fn hybrid_mean_derivative(
    f: &dyn Field2D,
    drifts: &DriftSet,
    params: &PhysicalParams,
    x: f64,
    x_tilde: f64,
) -> f64 {
    let j = f.jet(x, x_tilde);
    let d = drifts.eval(x, x_tilde);
    d.b * j.derivative(1, 0)
        + d.b_tilde_star * j.derivative(0, 1)
        + 0.5 * params.diffusion() * (j.derivative(2, 0) - j.derivative(0, 2))
}

/// Compares cell-binned empirical increments of `f` against `D̄f`, using
/// steps of size `dt` from the ensemble's final points.
pub fn mean_derivative_check(
    ensemble: &Ensemble,
    f: &dyn Field2D,
    drifts: &DriftSet,
    params: &PhysicalParams,
    dt: f64,
) -> Result<MeanDerivativeReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let w = CELL_WIDTH * stationary_covariance(params).var_x.sqrt();
    let amp = (params.diffusion() * dt).sqrt();
    let mut cells: BTreeMap<(i64, i64), CellSums> = BTreeMap::new();
    for (index, p) in ensemble.final_points().iter().enumerate() {
        let mut noise = PathNoise::new(ensemble.base_seed(), Purpose::Probe, index as u64);
        let (a, b) = noise.normals();
        let v = drifts.eval(p.x, p.x_tilde);
        let x1 = p.x + v.b * dt + amp * a;
        let y1 = p.x_tilde - v.b_tilde_star * dt + amp * b;
        let e = (f.value(x1, p.x_tilde) - f.value(p.x, y1)) / dt;
        let c = cells.entry(cell_key(p.x, p.x_tilde, w)).or_default();
        c.n += 1;
        c.sum += e;
        c.sum_sq += e * e;
        c.analytic += hybrid_mean_derivative(f, drifts, params, p.x, p.x_tilde);
    }
    let report: Vec<CellEstimate> = cells
        .into_iter()
        .filter(|(_, c)| c.n >= MIN_CELL_SAMPLES)
        .map(|((i, j), c)| {
            let n = c.n as f64;
            let mean = c.sum / n;
            let var = ((c.sum_sq - c.sum * c.sum / n) / (n - 1.0)).max(0.0);
            let empirical = Estimate::new(mean, (var / n).sqrt());
            let analytic = c.analytic / n;
            CellEstimate {
                center: (i as f64 * w, j as f64 * w),
                samples: c.n,
                empirical,
                analytic,
                z: empirical.z_score(analytic),
            }
        })
        .collect();
    if report.is_empty() {
        return Err(Error::InsufficientSamples(format!(
            "no cell holds {MIN_CELL_SAMPLES} samples"
        )));
    }
    Ok(MeanDerivativeReport {
        cells: report,
        cell_width: w,
    })
}
