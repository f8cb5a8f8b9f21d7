//! Power-sum accumulators and moment estimators.

use std::ops::{Add, AddAssign, Sub};

use crate::error::{Error, Result};
use crate::fields::jet::{index, EXPONENTS};
use crate::params::ThermalPoint;

const ORDER: usize = 4;
const LEN: usize = (ORDER + 1) * (ORDER + 2) / 2;

/// Running sums `Σ a^i b^j` for `i + j ≤ 4` over samples `(a, b)`.
///
/// Merging is plain addition, so partial sums can be combined in any grouping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSums {
    count: u64,
    sums: [f64; LEN],
}

impl Default for MomentSums {
    fn default() -> Self {
        MomentSums {
            count: 0,
            sums: [0.0; LEN],
        }
    }
}

impl MomentSums {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a ThermalPoint>) -> Self {
        let mut s = MomentSums::new();
        for p in points {
            s.push(p.x, p.x_tilde);
        }
        s
    }

    #[inline]
    pub fn push(&mut self, a: f64, b: f64) {
        self.count += 1;
        let a2 = a * a;
        let b2 = b * b;
        let ab = a * b;
        // index order (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) ...
        let s = &mut self.sums;
        s[0] += 1.0;
        s[1] += a;
        s[2] += b;
        s[3] += a2;
        s[4] += ab;
        s[5] += b2;
        s[6] += a2 * a;
        s[7] += a2 * b;
        s[8] += a * b2;
        s[9] += b2 * b;
        s[10] += a2 * a2;
        s[11] += a2 * ab;
        s[12] += a2 * b2;
        s[13] += ab * b2;
        s[14] += b2 * b2;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `Σ a^i b^j`.
    pub fn sum(&self, i: usize, j: usize) -> f64 {
        self.sums[index(i, j)]
    }

    /// Raw moment `E[a^i b^j]`.
    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.sum(i, j) / self.count as f64
    }

    /// Central moment `E[(a − ā)^i (b − b̄)^j]` (population normalisation).
    pub fn central(&self, i: usize, j: usize) -> f64 {
        let (ma, mb) = (self.raw(1, 0), self.raw(0, 1));
        let mut total = 0.0;
        for k in 0..=i {
            for l in 0..=j {
                total += binomial(i, k)
                    * binomial(j, l)
                    * self.raw(k, l)
                    * (-ma).powi((i - k) as i32)
                    * (-mb).powi((j - l) as i32);
            }
        }
        total
    }

    /// Unbiased covariance of `(a^i, b^j)` for the second-order pairs
    /// `(2,0)`, `(1,1)`, `(0,2)`.
    fn unbiased_second(&self, i: usize, j: usize) -> f64 {
        let n = self.count as f64;
        let (sa, sb) = (self.sum(1, 0), self.sum(0, 1));
        let cross = match (i, j) {
            (2, 0) => sa * sa,
            (1, 1) => sa * sb,
            _ => sb * sb,
        };
        (self.sum(i, j) - cross / n) / (n - 1.0)
    }

    /// The five tracked moments as plain values.
    pub fn moments(&self) -> [f64; 5] {
        [
            self.raw(1, 0),
            self.raw(0, 1),
            self.unbiased_second(2, 0),
            self.unbiased_second(0, 2),
            self.unbiased_second(1, 1),
        ]
    }

    /// The five tracked moments with delta-method standard errors for
    /// independent samples.
    pub fn delta_estimates(&self) -> Result<MomentEstimates> {
        if self.count < 2 {
            return Err(Error::InsufficientSamples(format!(
                "{} samples, need at least 2",
                self.count
            )));
        }
        let n = self.count as f64;
        let m = self.moments();
        let c20 = self.central(2, 0);
        let c02 = self.central(0, 2);
        let c11 = self.central(1, 1);
        let se = |v: f64| (v.max(0.0) / n).sqrt();
        Ok(MomentEstimates {
            mean_x: Estimate::new(m[0], se(c20)),
            mean_x_tilde: Estimate::new(m[1], se(c02)),
            var_x: Estimate::new(m[2], se(self.central(4, 0) - c20 * c20)),
            var_x_tilde: Estimate::new(m[3], se(self.central(0, 4) - c02 * c02)),
            cov: Estimate::new(m[4], se(self.central(2, 2) - c11 * c11)),
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl AddAssign for MomentSums {
    fn add_assign(&mut self, rhs: MomentSums) {
        self.count += rhs.count;
        for (a, b) in self.sums.iter_mut().zip(rhs.sums) {
            *a += b;
        }
    }
}

impl Add for MomentSums {
    type Output = MomentSums;
    fn add(mut self, rhs: MomentSums) -> MomentSums {
        self += rhs;
        self
    }
}

impl Sub for MomentSums {
    type Output = MomentSums;
    fn sub(mut self, rhs: MomentSums) -> MomentSums {
        self.count -= rhs.count;
        for (a, b) in self.sums.iter_mut().zip(rhs.sums) {
            *a -= b;
        }
        self
    }
}

// keep the hand-unrolled push in sync with the jet layout
const _: () = {
    assert!(EXPONENTS[7].0 == 2 && EXPONENTS[7].1 == 1);
    assert!(EXPONENTS[13].0 == 1 && EXPONENTS[13].1 == 3);
};

/// A value with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn new(value: f64, se: f64) -> Self {
        Estimate { value, se }
    }

    /// `|value − target| / se`; infinite when the error is zero and the value
    /// is off target.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        self.z_score(target) <= n_se
    }
}

/// `E[x]`, `E[x̃]`, `Var[x]`, `Var[x̃]`, `Cov[x, x̃]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimates {
    pub mean_x: Estimate,
    pub mean_x_tilde: Estimate,
    pub var_x: Estimate,
    pub var_x_tilde: Estimate,
    pub cov: Estimate,
}

impl MomentEstimates {
    pub fn as_array(&self) -> [Estimate; 5] {
        [
            self.mean_x,
            self.mean_x_tilde,
            self.var_x,
            self.var_x_tilde,
            self.cov,
        ]
    }
}

/// Delete-one-group jackknife of a statistic computed from summed data.
///
/// `stat` maps pooled totals to the estimate; each group's contribution is
/// removed in turn. Returns the full-sample estimate and its standard error.
pub fn jackknife<T, F>(groups: &[T], total: T, stat: F) -> Result<Vec<Estimate>>
where
    T: Copy + Sub<Output = T>,
    F: Fn(&T) -> Vec<f64>,
{
    let g = groups.len();
    if g < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{g} paths, need at least 2"
        )));
    }
    let full = stat(&total);
    let mut loo = vec![Vec::with_capacity(g); full.len()];
    for group in groups {
        for (k, v) in stat(&(total - *group)).into_iter().enumerate() {
            loo[k].push(v);
        }
    }
    let gf = g as f64;
    Ok(full
        .iter()
        .zip(loo)
        .map(|(&value, vals)| {
            let mean = vals.iter().sum::<f64>() / gf;
            let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
            Estimate::new(value, ((gf - 1.0) / gf * ss).sqrt())
        })
        .collect())
}

/// The five tracked moments with jackknife-over-groups standard errors.
pub fn jackknife_moments(groups: &[MomentSums]) -> Result<MomentEstimates> {
    let total = groups.iter().fold(MomentSums::new(), |a, b| a + *b);
    let e = jackknife(groups, total, |s| s.moments().to_vec())?;
    Ok(MomentEstimates {
        mean_x: e[0],
        mean_x_tilde: e[1],
        var_x: e[2],
        var_x_tilde: e[3],
        cov: e[4],
    })
}
