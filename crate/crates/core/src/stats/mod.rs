//! Estimators turning ensembles into the published equilibrium numbers:
//! marginal histograms, covariances and the uncertainty product.

pub mod csv;
pub mod histogram;
pub mod moments;

pub use histogram::{
    distribution_test, ChiSquareTest, GaussianMarginal, Histogram, Marginal, DEFAULT_BINS,
};
pub use moments::{jackknife, jackknife_moments, Estimate, MomentEstimates, MomentSums};

use crate::analytic::{stationary_covariance, uncertainty_product};
use crate::error::{Error, Result};
use crate::params::{thermal_occupation, PhysicalParams, ThermalPoint};
use crate::sde::{DriftSet, Ensemble};

/// Which samples of an ensemble an estimator reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleSlice {
    /// One sample per path at the final time.
    #[default]
    Final,
    /// Every recorded time of every path; needs `pool_samples` at simulation.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    X,
    XTilde,
}

impl Coordinate {
    pub fn of(&self, p: &ThermalPoint) -> f64 {
        match self {
            Coordinate::X => p.x,
            Coordinate::XTilde => p.x_tilde,
        }
    }
}

/// Samples grouped by path.
fn path_groups(ensemble: &Ensemble, slice: SampleSlice) -> Result<Vec<&[ThermalPoint]>> {
    match slice {
        SampleSlice::Final => Ok(ensemble.final_points().chunks(1).collect()),
        SampleSlice::Pooled => {
            let pooled = ensemble.pooled_points().ok_or_else(|| {
                Error::InsufficientSamples("ensemble was simulated without pooled samples".into())
            })?;
            Ok(pooled.chunks(ensemble.pooled_per_path()).collect())
        }
    }
}

/// Default histogram range `±5·sqrt(var_x)`.
pub fn default_range(params: &PhysicalParams) -> (f64, f64) {
    let half = 5.0 * stationary_covariance(params).var_x.sqrt();
    (-half, half)
}

/// Histogram of one marginal of the ensemble.
pub fn marginal_histogram(
    ensemble: &Ensemble,
    coordinate: Coordinate,
    bins: usize,
    range: (f64, f64),
    slice: SampleSlice,
) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::InvalidHistogram(format!("bins = {bins}, need at least 2")));
    }
    let mut h = Histogram::new(range.0, range.1, bins)?;
    for group in path_groups(ensemble, slice)? {
        h.extend(group.iter().map(|p| coordinate.of(p)));
    }
    if h.total() == 0 {
        return Err(Error::InsufficientSamples("ensemble is empty".into()));
    }
    Ok(h)
}

/// Sample moments with jackknife-over-paths standard errors.
pub fn moment_estimates(ensemble: &Ensemble, slice: SampleSlice) -> Result<MomentEstimates> {
    let groups: Vec<MomentSums> = path_groups(ensemble, slice)?
        .into_iter()
        .map(MomentSums::from_points)
        .collect();
    jackknife_moments(&groups)
}

/// Empirical finite-temperature uncertainty product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub beta_bar: f64,
    pub samples: usize,
    pub std_x: Estimate,
    /// Standard deviation of `(p − p*)/2` with `p = m b`, `p* = m b*`.
    pub std_halfdiff_p: Estimate,
    pub product: Estimate,
    /// `ħ/2 + ħ n`.
    pub analytic_product: f64,
    pub occupation: f64,
}

#[derive(Debug, Clone, Copy)]
struct UncertaintySums {
    n: f64,
    x: f64,
    xx: f64,
    q: f64,
    qq: f64,
}

impl std::ops::Sub for UncertaintySums {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        UncertaintySums {
            n: self.n - o.n,
            x: self.x - o.x,
            xx: self.xx - o.xx,
            q: self.q - o.q,
            qq: self.qq - o.qq,
        }
    }
}

impl UncertaintySums {
    fn stats(&self) -> Vec<f64> {
        let var = |s: f64, ss: f64| (ss - s * s / self.n) / (self.n - 1.0);
        let sx = var(self.x, self.xx).max(0.0).sqrt();
        let sq = var(self.q, self.qq).max(0.0).sqrt();
        vec![sx, sq, sx * sq]
    }
}

/// `sqrt(Var[x]) · sqrt(Var[(p − p*)/2])` with the momenta evaluated from
/// the drift fields at each sample.
pub fn uncertainty_estimate(
    ensemble: &Ensemble,
    drifts: &DriftSet,
    params: &PhysicalParams,
    slice: SampleSlice,
) -> Result<UncertaintyReport> {
    let m = params.mass();
    let groups: Vec<UncertaintySums> = path_groups(ensemble, slice)?
        .into_iter()
        .map(|pts| {
            pts.iter().fold(
                UncertaintySums { n: 0.0, x: 0.0, xx: 0.0, q: 0.0, qq: 0.0 },
                |acc, p| {
                    let d = drifts.eval(p.x, p.x_tilde);
                    let q = 0.5 * m * (d.b - d.b_star);
                    UncertaintySums {
                        n: acc.n + 1.0,
                        x: acc.x + p.x,
                        xx: acc.xx + p.x * p.x,
                        q: acc.q + q,
                        qq: acc.qq + q * q,
                    }
                },
            )
        })
        .collect();
    let total = groups.iter().fold(
        UncertaintySums { n: 0.0, x: 0.0, xx: 0.0, q: 0.0, qq: 0.0 },
        |a, g| UncertaintySums {
            n: a.n + g.n,
            x: a.x + g.x,
            xx: a.xx + g.xx,
            q: a.q + g.q,
            qq: a.qq + g.qq,
        },
    );
    let e = jackknife(&groups, total, UncertaintySums::stats)?;
    Ok(UncertaintyReport {
        beta_bar: params.beta_bar(),
        samples: total.n as usize,
        std_x: e[0],
        std_halfdiff_p: e[1],
        product: e[2],
        analytic_product: uncertainty_product(params),
        occupation: thermal_occupation(params),
    })
}
