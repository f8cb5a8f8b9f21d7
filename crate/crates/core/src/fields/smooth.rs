//! Closed-form scalar fields on the doubled configuration space.

use std::fmt;
use std::sync::Arc;

use super::jet::Jet;

/// A smooth scalar field `f(x, x̃)` that can report its Taylor jet.
pub trait Field2D: Send + Sync + fmt::Debug {
    fn jet(&self, x: f64, x_tilde: f64) -> Jet;

    fn value(&self, x: f64, x_tilde: f64) -> f64 {
        self.jet(x, x_tilde).value()
    }
}

pub type SharedField = Arc<dyn Field2D>;

/// Which coordinate a derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    XTilde,
}

/// `Σ c_ij x^i x̃^j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial2D {
    terms: Vec<(u32, u32, f64)>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

impl Polynomial2D {
    pub fn zero() -> Self {
        Polynomial2D::default()
    }

    pub fn constant(c: f64) -> Self {
        Polynomial2D::zero().with_term(0, 0, c)
    }

    /// `a x² + b x x̃ + c x̃²`.
    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        Polynomial2D::zero()
            .with_term(2, 0, a)
            .with_term(1, 1, b)
            .with_term(0, 2, c)
    }

    /// Adds `coeff · x^i x̃^j`, merging with an existing monomial.
    pub fn with_term(mut self, i: u32, j: u32, coeff: f64) -> Self {
        if let Some(t) = self.terms.iter_mut().find(|t| t.0 == i && t.1 == j) {
            t.2 += coeff;
        } else {
            self.terms.push((i, j, coeff));
        }
        self
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn scaled(&self, k: f64) -> Self {
        Polynomial2D {
            terms: self.terms.iter().map(|&(i, j, c)| (i, j, k * c)).collect(),
        }
    }

    pub fn plus(&self, other: &Polynomial2D) -> Self {
        other
            .terms
            .iter()
            .fold(self.clone(), |acc, &(i, j, c)| acc.with_term(i, j, c))
    }

    pub fn derivative(&self, axis: Axis) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|&(i, j, c)| match axis {
                Axis::X if i > 0 => Some((i - 1, j, c * f64::from(i))),
                Axis::XTilde if j > 0 => Some((i, j - 1, c * f64::from(j))),
                _ => None,
            })
            .collect();
        Polynomial2D { terms }
    }

    pub fn eval(&self, x: f64, x_tilde: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * x.powi(i as i32) * x_tilde.powi(j as i32))
            .sum()
    }
}

impl Field2D for Polynomial2D {
    fn jet(&self, x: f64, x_tilde: f64) -> Jet {
        Jet::from_taylor(|a, b| {
            let (a, b) = (a as u32, b as u32);
            self.terms
                .iter()
                .filter(|t| t.0 >= a && t.1 >= b)
                .map(|&(i, j, c)| {
                    c * binomial(i, a)
                        * binomial(j, b)
                        * x.powi((i - a) as i32)
                        * x_tilde.powi((j - b) as i32)
                })
                .sum()
        })
    }

    fn value(&self, x: f64, x_tilde: f64) -> f64 {
        self.eval(x, x_tilde)
    }
}

/// `a·x + ã·x̃ + c`; the equilibrium drifts are of this form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub coeff_x: f64,
    pub coeff_x_tilde: f64,
    pub offset: f64,
}

impl LinearField {
    pub fn new(coeff_x: f64, coeff_x_tilde: f64) -> Self {
        LinearField {
            coeff_x,
            coeff_x_tilde,
            offset: 0.0,
        }
    }

    pub fn zero() -> Self {
        LinearField::new(0.0, 0.0)
    }
}

impl Field2D for LinearField {
    fn jet(&self, x: f64, x_tilde: f64) -> Jet {
        Jet::x(x) * self.coeff_x + Jet::x_tilde(x_tilde) * self.coeff_x_tilde
            + Jet::constant(self.offset)
    }

    #[inline]
    fn value(&self, x: f64, x_tilde: f64) -> f64 {
        self.coeff_x * x + self.coeff_x_tilde * x_tilde + self.offset
    }
}

/// `scale · exp(log_density)`, e.g. the normalised `|Ψ|² = e^{2R}/N`.
#[derive(Debug, Clone)]
pub struct ExpField {
    pub log: SharedField,
    pub scale: f64,
}

impl Field2D for ExpField {
    fn jet(&self, x: f64, x_tilde: f64) -> Jet {
        self.log.jet(x, x_tilde).exp().scale(self.scale)
    }

    fn value(&self, x: f64, x_tilde: f64) -> f64 {
        self.scale * self.log.value(x, x_tilde).exp()
    }
}

/// `Σ_k w_k ∂_axis f_k`: a linear combination of gradient components.
///
/// Drifts built from `(R, S)` are of this form, e.g. `b = (ħ/m) ∂(R + S)`.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub axis: Axis,
    pub parts: Vec<(f64, SharedField)>,
}

impl Field2D for GradientField {
    fn jet(&self, x: f64, x_tilde: f64) -> Jet {
        self.parts
            .iter()
            .map(|(w, f)| {
                let j = f.jet(x, x_tilde);
                let d = match self.axis {
                    Axis::X => j.d_dx(),
                    Axis::XTilde => j.d_dx_tilde(),
                };
                d.scale(*w)
            })
            .fold(Jet::constant(0.0), |a, b| a + b)
    }
}
