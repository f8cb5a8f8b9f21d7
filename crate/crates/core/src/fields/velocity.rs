//! Current and osmotic velocities of the non-tilde and tilde particles.

use super::grid::{GridField, GridSpec};
use super::jet::Jet;
use super::smooth::SharedField;
use super::ScalarField2D;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Largest tolerated change of a gradient between stencil spans `h` and `2h`.
pub const MAX_RESOLUTION_CHANGE: f64 = 0.10;

/// `u = (ħ/m)∂R`, `ũ = (ħ/m)∂̃R`, `v = (ħ/m)∂S`, `ṽ = −(ħ/m)∂̃S`.
///
/// The current velocities are only ever built from a single phase `S`, so
/// `v` and `−ṽ` are always gradients of one function.
#[derive(Debug, Clone)]
pub enum VelocityFields {
    Closed {
        r: SharedField,
        s: SharedField,
        hbar_over_m: f64,
    },
    Grid {
        u: GridField,
        u_tilde: GridField,
        v: GridField,
        v_tilde: GridField,
    },
}

/// Jets of `(u, ũ, v, ṽ)` at one point.
#[derive(Debug, Clone, Copy)]
pub struct VelocityJets {
    pub u: Jet,
    pub u_tilde: Jet,
    pub v: Jet,
    pub v_tilde: Jet,
}

impl VelocityFields {
    pub fn is_closed(&self) -> bool {
        matches!(self, VelocityFields::Closed { .. })
    }

    /// Closed-form jets; `None` for gridded velocities.
    pub fn jets(&self, x: f64, x_tilde: f64) -> Option<VelocityJets> {
        match self {
            VelocityFields::Closed { r, s, hbar_over_m } => {
                let rj = r.jet(x, x_tilde);
                let sj = s.jet(x, x_tilde);
                Some(VelocityJets {
                    u: rj.d_dx().scale(*hbar_over_m),
                    u_tilde: rj.d_dx_tilde().scale(*hbar_over_m),
                    v: sj.d_dx().scale(*hbar_over_m),
                    v_tilde: sj.d_dx_tilde().scale(-*hbar_over_m),
                })
            }
            VelocityFields::Grid { .. } => None,
        }
    }

    /// `(u, ũ, v, ṽ)` sampled on `spec`.
    pub fn to_grids(&self, spec: &GridSpec) -> Result<[GridField; 4]> {
        match self {
            VelocityFields::Closed { .. } => {
                let comp = |k: usize| {
                    GridField::sample(*spec, |x, y| {
                        let j = self.jets(x, y).expect("closed");
                        [j.u, j.u_tilde, j.v, j.v_tilde][k].value()
                    })
                };
                Ok([comp(0), comp(1), comp(2), comp(3)])
            }
            VelocityFields::Grid {
                u,
                u_tilde,
                v,
                v_tilde,
            } => {
                let probe = GridField::zeros(*spec);
                for g in [u, u_tilde, v, v_tilde] {
                    g.check_lattice(&probe)?;
                }
                Ok([u.clone(), u_tilde.clone(), v.clone(), v_tilde.clone()])
            }
        }
    }
}

/// Builds the four velocities from the amplitude exponent `R` and phase `S`
/// of `Ψ = e^{R+iS}`.
///
/// Closed-form inputs give closed-form velocities. If either input is a
/// grid, the other is sampled on the same lattice and derivatives use
/// central differences; the gradient must not change by more than 10% when
/// the stencil span doubles, otherwise [`Error::GridTooCoarse`].
pub fn velocities_from_rs(
    r: &ScalarField2D,
    s: &ScalarField2D,
    params: &PhysicalParams,
) -> Result<VelocityFields> {
    let k = params.diffusion();
    match (r, s) {
        (ScalarField2D::Closed(r), ScalarField2D::Closed(s)) => Ok(VelocityFields::Closed {
            r: r.clone(),
            s: s.clone(),
            hbar_over_m: k,
        }),
        _ => {
            let spec = match (r, s) {
                (ScalarField2D::Grid(g), _) | (_, ScalarField2D::Grid(g)) => *g.spec(),
                _ => unreachable!(),
            };
            let rg = r.to_grid(&spec)?;
            let sg = s.to_grid(&spec)?;
            let change = rg.gradient_resolution_change().max(sg.gradient_resolution_change());
            if change > MAX_RESOLUTION_CHANGE {
                return Err(Error::GridTooCoarse {
                    relative_change: change,
                });
            }
            Ok(VelocityFields::Grid {
                u: rg.d_dx().map(|d| k * d),
                u_tilde: rg.d_dx_tilde().map(|d| k * d),
                v: sg.d_dx().map(|d| k * d),
                v_tilde: sg.d_dx_tilde().map(|d| -k * d),
            })
        }
    }
}
