//! Uniform-bin histograms and Pearson chi-square tests against a marginal.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::analytic::stationary_covariance;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;

pub const DEFAULT_BINS: usize = 101;

/// Minimum expected count per retained cell of the chi-square test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Counts on `[lo, hi)` split into equal bins, plus out-of-range tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidHistogram("need at least one bin".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidHistogram(format!("empty range [{lo}, {hi})")));
        }
        Ok(Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn fill(&mut self, value: f64) {
        if value < self.lo {
            self.underflow += 1;
        } else if value >= self.hi {
            self.overflow += 1;
        } else {
            let k = ((value - self.lo) / self.width()) as usize;
            // rounding can push values just below hi into a phantom bin
            let k = k.min(self.counts.len() - 1);
            self.counts[k] += 1;
        }
    }

    pub fn extend(&mut self, values: impl IntoIterator<Item = f64>) {
        for v in values {
            self.fill(v);
        }
    }

    /// Adds another histogram's counts; edges must match exactly.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(Error::InvalidHistogram("bin edges differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn underflow(&self) -> u64 {
        self.underflow
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    /// Samples inside `[lo, hi)`.
    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// All samples, including out-of-range ones.
    pub fn total(&self) -> u64 {
        self.in_range() + self.underflow + self.overflow
    }

    /// `(lo, hi)` of bin `k`.
    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        let lo = self.lo + k as f64 * w;
        let hi = if k + 1 == self.counts.len() {
            self.hi
        } else {
            self.lo + (k + 1) as f64 * w
        };
        (lo, hi)
    }

    pub fn center(&self, k: usize) -> f64 {
        let (a, b) = self.edges(k);
        0.5 * (a + b)
    }

    /// Counts divided by `in_range · width`; integrates to one over the range.
    pub fn density(&self) -> Vec<f64> {
        let n = self.in_range();
        if n == 0 {
            return vec![0.0; self.counts.len()];
        }
        let norm = n as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Bin-averaged density of `marginal` on the same bins.
    pub fn expected_density(&self, marginal: &dyn Marginal) -> Vec<f64> {
        (0..self.bins())
            .map(|k| {
                let (a, b) = self.edges(k);
                (marginal.cdf(b) - marginal.cdf(a)) / (b - a)
            })
            .collect()
    }
}

/// A one-dimensional probability distribution.
pub trait Marginal {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMarginal {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianMarginal {
    /// Either marginal of the equilibrium density `e^{2R_eq}`.
    pub fn equilibrium(params: &PhysicalParams) -> Self {
        GaussianMarginal {
            mean: 0.0,
            variance: stationary_covariance(params).var_x,
        }
    }

    pub fn peak_density(&self) -> f64 {
        self.pdf(self.mean)
    }
}

impl Marginal for GaussianMarginal {
    fn pdf(&self, x: f64) -> f64 {
        let z = x - self.mean;
        (-0.5 * z * z / self.variance).exp() / (2.0 * std::f64::consts::PI * self.variance).sqrt()
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mean) / (2.0 * self.variance).sqrt())
    }
}

/// Outcome of a Pearson chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells left after merging sparse neighbours.
    pub cells: usize,
}

/// Pearson chi-square test of all samples (tails included) against
/// `marginal`.
///
/// Cells are the two open tails plus every bin; neighbouring cells are merged
/// left to right until each expects at least [`MIN_EXPECTED`] counts.
pub fn distribution_test(hist: &Histogram, marginal: &dyn Marginal) -> Result<ChiSquareTest> {
    let n = hist.total();
    if n == 0 {
        return Err(Error::DegenerateBins("histogram is empty".into()));
    }
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(hist.bins() + 2);
    cells.push((hist.underflow as f64, nf * marginal.cdf(hist.lo)));
    for k in 0..hist.bins() {
        let (a, b) = hist.edges(k);
        cells.push((hist.counts[k] as f64, nf * (marginal.cdf(b) - marginal.cdf(a))));
    }
    cells.push((hist.overflow as f64, nf * (1.0 - marginal.cdf(hist.hi))));

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (obs, exp) in cells {
        acc.0 += obs;
        acc.1 += exp;
        if acc.1 >= MIN_EXPECTED {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    if merged.len() < 2 {
        return Err(Error::DegenerateBins(format!(
            "{} cell(s) left after merging to expected counts ≥ {MIN_EXPECTED}",
            merged.len()
        )));
    }
    let statistic: f64 = merged
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = merged.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        cells: merged.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_single_bin_density() {
        let mut h = Histogram::new(-0.5, 0.5, 1).unwrap();
        h.fill(0.0);
        assert_eq!(h.density(), vec![1.0]);
    }

    #[test]
    fn density_integrates_to_one() {
        let mut h = Histogram::new(-2.0, 3.0, 37).unwrap();
        h.extend((0..1000).map(|k| (k as f64 * 0.618).sin() * 2.5));
        let integral: f64 = h.density().iter().map(|d| d * h.width()).sum();
        assert!((integral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_conserves_counts() {
        let vals: Vec<f64> = (0..500).map(|k| (k as f64 * 1.7).cos() * 4.0).collect();
        let mut whole = Histogram::new(-3.0, 3.0, 10).unwrap();
        whole.extend(vals.iter().copied());
        let mut a = Histogram::new(-3.0, 3.0, 10).unwrap();
        let mut b = a.clone();
        a.extend(vals[..200].iter().copied());
        b.extend(vals[200..].iter().copied());
        a.merge(&b).unwrap();
        assert_eq!(a, whole);
        assert!(a.merge(&Histogram::new(-3.0, 3.0, 11).unwrap()).is_err());
    }

    #[test]
    fn invalid_construction() {
        assert!(Histogram::new(0.0, 1.0, 0).is_err());
        assert!(Histogram::new(1.0, 1.0, 4).is_err());
        assert!(Histogram::new(0.0, f64::NAN, 4).is_err());
    }

    #[test]
    fn edge_values_land_in_range() {
        let mut h = Histogram::new(0.0, 0.3, 3).unwrap();
        h.fill(f64::from_bits(0.3f64.to_bits() - 1));
        h.fill(0.0);
        h.fill(0.3);
        assert_eq!(h.in_range(), 2);
        assert_eq!(h.overflow(), 1);
    }

    #[test]
    fn gaussian_cdf_values() {
        let g = GaussianMarginal { mean: 1.0, variance: 4.0 };
        assert!((g.cdf(1.0) - 0.5).abs() < 1e-15);
        // Φ(1) = 0.8413447460685429; statrs erfc is good to ~1e-11 here
        let c = g.cdf(3.0);
        assert!((c - 0.841_344_746_068_542_9).abs() < 1e-10, "{c}");
        assert!((g.pdf(1.0) - 1.0 / (8.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tiny_sample_is_degenerate() {
        let mut h = Histogram::new(-1.0, 1.0, 4).unwrap();
        h.fill(0.1);
        let g = GaussianMarginal { mean: 0.0, variance: 1.0 };
        assert!(matches!(distribution_test(&h, &g), Err(Error::DegenerateBins(_))));
        let empty = Histogram::new(-1.0, 1.0, 4).unwrap();
        assert!(distribution_test(&empty, &g).is_err());
    }

    #[test]
    fn exact_expected_counts_give_zero_statistic() {
        // observed = expected when the marginal is uniform over the range
        struct Uniform;
        impl Marginal for Uniform {
            fn pdf(&self, x: f64) -> f64 {
                if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }
            }
            fn cdf(&self, x: f64) -> f64 {
                x.clamp(0.0, 1.0)
            }
        }
        let mut h = Histogram::new(0.0, 1.0, 10).unwrap();
        for k in 0..1000 {
            h.fill((k as f64 + 0.5) / 1000.0);
        }
        let t = distribution_test(&h, &Uniform).unwrap();
        assert!(t.statistic < 1e-9);
        assert_eq!(t.dof, 9);
        assert!(t.p_value > 0.999);
    }
}
