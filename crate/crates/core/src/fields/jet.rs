//! Truncated bivariate Taylor expansions ("jets") in `(x, x̃)`.
//!
//! A jet stores `c[i,j] = ∂^i ∂̃^j f / (i! j!)` at a point for `i + j ≤ 4`.
//! Arithmetic on jets is exact up to the tracked order, which gives the
//! closed-form residual checks derivatives free of truncation error.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 4;
const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

#[inline]
pub(crate) const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const fn exponents() -> [(usize, usize); LEN] {
    let mut out = [(0, 0); LEN];
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut j = 0;
        while j <= d {
            out[index(d - j, j)] = (d - j, j);
            j += 1;
        }
        d += 1;
    }
    out
}

pub(crate) const EXPONENTS: [(usize, usize); LEN] = exponents();

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    coeffs: [f64; LEN],
    /// Highest total degree whose coefficients are exact.
    order: usize,
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = value;
        Jet {
            coeffs,
            order: MAX_ORDER,
        }
    }

    /// The coordinate `x` expanded at `x0`.
    pub fn x(x0: f64) -> Self {
        let mut j = Jet::constant(x0);
        j.coeffs[index(1, 0)] = 1.0;
        j
    }

    /// The coordinate `x̃` expanded at `x̃0`.
    pub fn x_tilde(x_tilde0: f64) -> Self {
        let mut j = Jet::constant(x_tilde0);
        j.coeffs[index(0, 1)] = 1.0;
        j
    }

    /// Builds a jet from Taylor coefficients `c(i, j)` (not derivatives).
    pub fn from_taylor(mut coeff: impl FnMut(usize, usize) -> f64) -> Self {
        let mut coeffs = [0.0; LEN];
        for (k, &(i, j)) in EXPONENTS.iter().enumerate() {
            coeffs[k] = coeff(i, j);
        }
        Jet {
            coeffs,
            order: MAX_ORDER,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn taylor(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= self.order, "jet of order {} queried at ({i},{j})", self.order);
        self.coeffs[index(i, j)]
    }

    /// `∂^i ∂̃^j f` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        self.taylor(i, j) * FACTORIAL[i] * FACTORIAL[j]
    }

    pub fn d_dx(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut coeffs = [0.0; LEN];
        for (k, &(i, j)) in EXPONENTS.iter().enumerate() {
            if i + j < MAX_ORDER {
                coeffs[k] = (i + 1) as f64 * self.coeffs[index(i + 1, j)];
            }
        }
        Jet {
            coeffs,
            order: self.order - 1,
        }
    }

    pub fn d_dx_tilde(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut coeffs = [0.0; LEN];
        for (k, &(i, j)) in EXPONENTS.iter().enumerate() {
            if i + j < MAX_ORDER {
                coeffs[k] = (j + 1) as f64 * self.coeffs[index(i, j + 1)];
            }
        }
        Jet {
            coeffs,
            order: self.order - 1,
        }
    }

    /// The split Laplacian `(∂² − ∂̃²) f` of the doubled configuration space.
    pub fn split_laplacian(&self) -> Self {
        self.d_dx().d_dx() - self.d_dx_tilde().d_dx_tilde()
    }

    pub fn scale(mut self, k: f64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= k);
        self
    }

    fn nilpotent(&self) -> Self {
        let mut n = *self;
        n.coeffs[0] = 0.0;
        n
    }

    /// Evaluates `Σ_k a[k] n^k` with `n` the nilpotent part.
    fn series(&self, a: [f64; MAX_ORDER + 1]) -> Self {
        let n = self.nilpotent();
        // Horner; n^5 vanishes at this truncation
        let mut acc = Jet::constant(a[MAX_ORDER]);
        acc.order = self.order;
        for k in (0..MAX_ORDER).rev() {
            acc = acc * n + Jet::constant(a[k]);
        }
        acc.order = self.order;
        acc
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.series([e, e, e / 2.0, e / 6.0, e / 24.0])
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Self {
        let c = self.value();
        let ic = 1.0 / c;
        self.series([
            c.ln(),
            ic,
            -ic * ic / 2.0,
            ic * ic * ic / 3.0,
            -ic * ic * ic * ic / 4.0,
        ])
    }

    pub fn recip(&self) -> Self {
        let ic = 1.0 / self.value();
        self.series([ic, -ic * ic, ic.powi(3), -ic.powi(4), ic.powi(5)])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
        self.order = self.order.min(rhs.order);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut coeffs = [0.0; LEN];
        for (ka, &(ia, ja)) in EXPONENTS.iter().enumerate() {
            let a = self.coeffs[ka];
            if a == 0.0 {
                continue;
            }
            for (kb, &(ib, jb)) in EXPONENTS.iter().enumerate() {
                if ia + ja + ib + jb > MAX_ORDER {
                    break;
                }
                coeffs[index(ia + ib, ja + jb)] += a * rhs.coeffs[kb];
            }
        }
        Jet {
            coeffs,
            order: self.order.min(rhs.order),
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_is_dense() {
        let mut seen = [false; LEN];
        for d in 0..=MAX_ORDER {
            for j in 0..=d {
                seen[index(d - j, j)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(EXPONENTS[index(3, 1)], (3, 1));
    }

    #[test]
    fn polynomial_products_match_hand_derivatives() {
        let (x0, y0) = (0.7, -1.3);
        let x = Jet::x(x0);
        let y = Jet::x_tilde(y0);
        // f = x² y + 3 y³
        let f = x * x * y + y * y * y * 3.0;
        assert!((f.value() - (x0 * x0 * y0 + 3.0 * y0.powi(3))).abs() < 1e-14);
        assert!((f.derivative(1, 0) - 2.0 * x0 * y0).abs() < 1e-14);
        assert!((f.derivative(0, 1) - (x0 * x0 + 9.0 * y0 * y0)).abs() < 1e-14);
        assert!((f.derivative(2, 1) - 2.0).abs() < 1e-14);
        assert!((f.derivative(0, 3) - 18.0).abs() < 1e-14);
        assert_eq!(f.derivative(2, 2), 0.0);
    }

    #[test]
    fn exp_ln_recip_against_closed_forms() {
        let (x0, y0) = (0.3, 0.4);
        let g = Jet::x(x0) * Jet::x_tilde(y0) * 2.0 - Jet::x(x0) * Jet::x(x0);
        let e = g.exp();
        let gv = 2.0 * x0 * y0 - x0 * x0;
        let gx = 2.0 * y0 - 2.0 * x0;
        let gxx = -2.0;
        // ∂²e^g = e^g (g_x² + g_xx)
        assert!((e.derivative(2, 0) - gv.exp() * (gx * gx + gxx)).abs() < 1e-13);
        // ∂³e^g = e^g (g_x³ + 3 g_x g_xx)
        assert!((e.derivative(3, 0) - gv.exp() * (gx.powi(3) + 3.0 * gx * gxx)).abs() < 1e-12);
        let back = e.ln();
        for &(i, j) in EXPONENTS.iter() {
            assert!((back.taylor(i, j) - g.taylor(i, j)).abs() < 1e-12, "({i},{j})");
        }
        let one = e * e.recip();
        assert!((one.value() - 1.0).abs() < 1e-14);
        for &(i, j) in EXPONENTS.iter().skip(1) {
            assert!(one.taylor(i, j).abs() < 1e-12);
        }
    }

    #[test]
    fn differentiation_lowers_order() {
        let j = Jet::x(1.0).exp();
        assert_eq!(j.d_dx().order(), 3);
        assert_eq!(j.split_laplacian().order(), 2);
        assert!((j.split_laplacian().value() - 1f64.exp()).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn querying_beyond_order_panics() {
        let j = Jet::x(1.0).d_dx().d_dx();
        j.derivative(2, 1);
    }
}
