//! Stationary residuals of the field equations.
//!
//! Every residual is written as `LHS − RHS` of its equation with all time
//! derivatives set to zero, evaluated at the nodes of a lattice and reduced
//! to a max-norm that skips [`RESIDUAL_MARGIN`] boundary cells. With
//! `D = ħ/2m`:
//!
//! | residual | pointwise value |
//! |---|---|
//! | osmotic | `u − D ∂P/P`, `ũ − D ∂̃P/P` |
//! | continuity | `∂(vP) + ∂̃(ṽP)` |
//! | forward FP | `∂(bP) + ∂̃(b̃*P) − D(∂² − ∂̃²)P` |
//! | backward FP | `∂(b*P) + ∂̃(b̃P) + D(∂² − ∂̃²)P` |
//! | kinematical | `−D(∂² − ∂̃²)v − ∂(uv + ũṽ)` |
//! | dynamical | `D(∂² − ∂̃²)u + (u∂ − ũ∂̃)u − (v∂ + ṽ∂̃)v − ∂(V − Ṽ)/m` |
//!
//! so forward + backward FP is twice the continuity residual and their
//! difference is twice [`osmotic_divergence_residual`].
//!
//! When every input is closed-form the values come from Taylor jets and are
//! exact to rounding; otherwise all inputs are sampled on the lattice and
//! differentiated with second-order central differences.

use rayon::prelude::*;

use super::grid::{GridField, GridSpec};
use super::jet::Jet;
use super::velocity::VelocityFields;
use super::ScalarField2D;
use crate::analytic::{ground_state_variance, stationary_covariance};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::sde::DriftSet;

/// Boundary cells excluded from every residual norm.
pub const RESIDUAL_MARGIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpDirection {
    Forward,
    Backward,
}

/// Default lattice spacing in units of `sqrt(ħ/mω)`.
pub const DEFAULT_SPACING: f64 = 0.005;

/// Default half-width in units of `sqrt(var_x)`.
pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

/// Lowest log-density allowed at the domain corners.
const MIN_LOG_DENSITY: f64 = -600.0;

/// The default residual domain `[−L, L]²` for the equilibrium solution.
///
/// `L = 6·sqrt(var_x)` unless the corner `(L, −L)` of the strongly
/// correlated high-temperature density would fall below `e^{−600}`; then `L`
/// shrinks so that the density stays a normal positive float everywhere.
pub fn default_domain(params: &PhysicalParams, spacing: Option<f64>) -> Result<GridSpec> {
    let unit = ground_state_variance(params);
    let var_x = stationary_covariance(params).var_x;
    // ln P(L, −L) + const = −L²·coth(β̄/4)/(ħ/2mω)
    let tanh_quarter = (0.25 * params.beta_bar()).tanh();
    let cap = (-MIN_LOG_DENSITY * unit * tanh_quarter).sqrt();
    let half_width = (DEFAULT_HALF_WIDTH * var_x.sqrt()).min(cap);
    let h = spacing.unwrap_or(DEFAULT_SPACING * params.length_scale());
    GridSpec::new(half_width, h)
}

/// Pointwise residual components and their joint max-norm.
#[derive(Debug, Clone)]
pub struct Residual {
    pub components: Vec<GridField>,
    pub norm: f64,
    pub closed_form: bool,
}

impl Residual {
    fn new(components: Vec<GridField>, closed_form: bool) -> Self {
        let norm = components
            .iter()
            .map(|c| c.max_abs(RESIDUAL_MARGIN))
            .fold(0.0, f64::max);
        Residual {
            components,
            norm,
            closed_form,
        }
    }

    pub fn field(&self) -> &GridField {
        &self.components[0]
    }
}

/// Fills the interior of `spec` (outside the margin) with `f(i, j)`.
fn interior(spec: &GridSpec, f: impl Fn(usize, usize) -> f64 + Sync) -> GridField {
    let n = spec.points();
    let mut values = vec![0.0; spec.len()];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        if i < RESIDUAL_MARGIN || i + RESIDUAL_MARGIN >= n {
            return;
        }
        for (j, slot) in row.iter_mut().enumerate().take(n - RESIDUAL_MARGIN).skip(RESIDUAL_MARGIN) {
            *slot = f(i, j);
        }
    });
    GridField::from_values(*spec, values).expect("residual values finite")
}

fn closed_density(density: &ScalarField2D) -> Option<&super::SharedField> {
    match density {
        ScalarField2D::Closed(f) => Some(f),
        ScalarField2D::Grid(_) => None,
    }
}

fn check_positive_jet(p: &Jet, x: f64, y: f64) -> Result<()> {
    if p.value() > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveDensity {
            x,
            x_tilde: y,
            value: p.value(),
        })
    }
}

fn check_positive_grid(p: &GridField) -> Result<()> {
    let spec = p.spec();
    for i in 0..spec.points() {
        for j in 0..spec.points() {
            let v = p.at(i, j);
            if v <= 0.0 {
                return Err(Error::NonPositiveDensity {
                    x: spec.coord(i),
                    x_tilde: spec.coord(j),
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// First error raised by a pointwise closed-form evaluation, if any.
fn first_error(spec: &GridSpec, check: impl Fn(f64, f64) -> Result<()> + Sync) -> Result<()> {
    let n = spec.points();
    (RESIDUAL_MARGIN..n - RESIDUAL_MARGIN)
        .into_par_iter()
        .map(|i| {
            for j in RESIDUAL_MARGIN..n - RESIDUAL_MARGIN {
                check(spec.coord(i), spec.coord(j))?;
            }
            Ok(())
        })
        .collect::<Result<Vec<()>>>()
        .map(|_| ())
}

/// Osmotic relation `u = (ħ/2m)∂ln P`, `ũ = (ħ/2m)∂̃ln P`.
pub fn osmotic_residual(
    vel: &VelocityFields,
    density: &ScalarField2D,
    params: &PhysicalParams,
    domain: &GridSpec,
) -> Result<Residual> {
    let d = 0.5 * params.diffusion();
    if let (true, Some(p)) = (vel.is_closed(), closed_density(density)) {
        first_error(domain, |x, y| check_positive_jet(&p.jet(x, y), x, y))?;
        let eval = |k: usize| {
            interior(domain, |i, j| {
                let (x, y) = (domain.coord(i), domain.coord(j));
                let pj = p.jet(x, y);
                let vj = vel.jets(x, y).expect("closed");
                if k == 0 {
                    vj.u.value() - d * pj.derivative(1, 0) / pj.value()
                } else {
                    vj.u_tilde.value() - d * pj.derivative(0, 1) / pj.value()
                }
            })
        };
        return Ok(Residual::new(vec![eval(0), eval(1)], true));
    }
    let pg = density.to_grid(domain)?;
    check_positive_grid(&pg)?;
    let [u, ut, _, _] = vel.to_grids(domain)?;
    let r = interior(domain, |i, j| u.at(i, j) - d * pg.dx_at(i, j) / pg.at(i, j));
    let rt = interior(domain, |i, j| ut.at(i, j) - d * pg.dxt_at(i, j) / pg.at(i, j));
    Ok(Residual::new(vec![r, rt], false))
}

/// Divergence form of the osmotic relation,
/// `∂(uP − D∂P) − ∂̃(ũP − D∂̃P)`, i.e. half the difference of the two
/// Fokker-Planck residuals.
pub fn osmotic_divergence_residual(
    vel: &VelocityFields,
    density: &ScalarField2D,
    params: &PhysicalParams,
    domain: &GridSpec,
) -> Result<Residual> {
    let d = 0.5 * params.diffusion();
    if let (true, Some(p)) = (vel.is_closed(), closed_density(density)) {
        let f = interior(domain, |i, j| {
            let (x, y) = (domain.coord(i), domain.coord(j));
            let pj = p.jet(x, y);
            let vj = vel.jets(x, y).expect("closed");
            let flux = vj.u * pj - pj.d_dx().scale(d);
            let flux_t = vj.u_tilde * pj - pj.d_dx_tilde().scale(d);
            flux.d_dx().value() - flux_t.d_dx_tilde().value()
        });
        return Ok(Residual::new(vec![f], true));
    }
    let pg = density.to_grid(domain)?;
    let [u, ut, _, _] = vel.to_grids(domain)?;
    let h = domain.spacing();
    let f = interior(domain, |i, j| {
        let up = |a: usize, b: usize| u.at(a, b) * pg.at(a, b);
        let utp = |a: usize, b: usize| ut.at(a, b) * pg.at(a, b);
        (up(i + 1, j) - up(i - 1, j)) / (2.0 * h) - (utp(i, j + 1) - utp(i, j - 1)) / (2.0 * h)
            - d * (pg.dxx_at(i, j) - pg.dxtxt_at(i, j))
    });
    Ok(Residual::new(vec![f], false))
}

/// Stationary continuity equation `∂(vP) + ∂̃(ṽP) = 0`.
pub fn continuity_residual(
    vel: &VelocityFields,
    density: &ScalarField2D,
    _params: &PhysicalParams,
    domain: &GridSpec,
) -> Result<Residual> {
    if let (true, Some(p)) = (vel.is_closed(), closed_density(density)) {
        first_error(domain, |x, y| check_positive_jet(&p.jet(x, y), x, y))?;
        let f = interior(domain, |i, j| {
            let (x, y) = (domain.coord(i), domain.coord(j));
            let pj = p.jet(x, y);
            let vj = vel.jets(x, y).expect("closed");
            (vj.v * pj).d_dx().value() + (vj.v_tilde * pj).d_dx_tilde().value()
        });
        return Ok(Residual::new(vec![f], true));
    }
    let pg = density.to_grid(domain)?;
    check_positive_grid(&pg)?;
    let [_, _, v, vt] = vel.to_grids(domain)?;
    let h = domain.spacing();
    let f = interior(domain, |i, j| {
        let vp = |a: usize, b: usize| v.at(a, b) * pg.at(a, b);
        let vtp = |a: usize, b: usize| vt.at(a, b) * pg.at(a, b);
        (vp(i + 1, j) - vp(i - 1, j)) / (2.0 * h) + (vtp(i, j + 1) - vtp(i, j - 1)) / (2.0 * h)
    });
    Ok(Residual::new(vec![f], false))
}

/// Stationary forward or backward Fokker-Planck equation for `P(x, x̃)`.
///
/// Drifts are closed-form; in grid mode they are evaluated at the lattice
/// nodes and the density is differentiated by central differences.
pub fn fokker_planck_residual(
    drifts: &DriftSet,
    density: &ScalarField2D,
    params: &PhysicalParams,
    direction: FpDirection,
    domain: &GridSpec,
) -> Result<Residual> {
    let d = 0.5 * params.diffusion();
    let (bx, bt, sign) = match direction {
        FpDirection::Forward => (&drifts.b, &drifts.b_tilde_star, -1.0),
        FpDirection::Backward => (&drifts.b_star, &drifts.b_tilde, 1.0),
    };
    if let Some(p) = closed_density(density) {
        first_error(domain, |x, y| check_positive_jet(&p.jet(x, y), x, y))?;
        let f = interior(domain, |i, j| {
            let (x, y) = (domain.coord(i), domain.coord(j));
            let pj = p.jet(x, y);
            (bx.jet(x, y) * pj).d_dx().value() + (bt.jet(x, y) * pj).d_dx_tilde().value()
                + sign * d * pj.split_laplacian().value()
        });
        return Ok(Residual::new(vec![f], true));
    }
    let pg = density.to_grid(domain)?;
    check_positive_grid(&pg)?;
    let h = domain.spacing();
    let f = interior(domain, |i, j| {
        let c = |k: usize| domain.coord(k);
        let flux_x = |a: usize| bx.value(c(a), c(j)) * pg.at(a, j);
        let flux_t = |b: usize| bt.value(c(i), c(b)) * pg.at(i, b);
        (flux_x(i + 1) - flux_x(i - 1)) / (2.0 * h) + (flux_t(j + 1) - flux_t(j - 1)) / (2.0 * h)
            + sign * d * (pg.dxx_at(i, j) - pg.dxtxt_at(i, j))
    });
    Ok(Residual::new(vec![f], false))
}

/// Stationary kinematical equation
/// `0 = −D(∂² − ∂̃²)v − ∂(u·v + ũ·ṽ)`.
pub fn kinematical_residual(
    vel: &VelocityFields,
    params: &PhysicalParams,
    domain: &GridSpec,
) -> Result<Residual> {
    let d = 0.5 * params.diffusion();
    if vel.is_closed() {
        let f = interior(domain, |i, j| {
            let (x, y) = (domain.coord(i), domain.coord(j));
            let v = vel.jets(x, y).expect("closed");
            let w = v.u * v.v + v.u_tilde * v.v_tilde;
            -d * v.v.split_laplacian().value() - w.d_dx().value()
        });
        return Ok(Residual::new(vec![f], true));
    }
    let [u, ut, v, vt] = vel.to_grids(domain)?;
    let h = domain.spacing();
    let f = interior(domain, |i, j| {
        let w = |a: usize| u.at(a, j) * v.at(a, j) + ut.at(a, j) * vt.at(a, j);
        -d * (v.dxx_at(i, j) - v.dxtxt_at(i, j)) - (w(i + 1) - w(i - 1)) / (2.0 * h)
    });
    Ok(Residual::new(vec![f], false))
}

/// Stationary dynamical (Nelson-Newton) equation
/// `0 = D(∂² − ∂̃²)u + (u∂ − ũ∂̃)u − (v∂ + ṽ∂̃)v − ∂(V − Ṽ)/m`.
///
/// `potential` is `V` as a function of the non-tilde coordinate; the tilde
/// copy `Ṽ = V(x̃)` has no `x` dependence and drops out of `∂`.
pub fn dynamical_residual(
    vel: &VelocityFields,
    potential: &ScalarField2D,
    params: &PhysicalParams,
    domain: &GridSpec,
) -> Result<Residual> {
    let d = 0.5 * params.diffusion();
    let inv_m = 1.0 / params.mass();
    if let (true, ScalarField2D::Closed(pot)) = (vel.is_closed(), potential) {
        let f = interior(domain, |i, j| {
            let (x, y) = (domain.coord(i), domain.coord(j));
            let v = vel.jets(x, y).expect("closed");
            let (u, ut, cv, cvt) = (v.u.value(), v.u_tilde.value(), v.v.value(), v.v_tilde.value());
            d * v.u.split_laplacian().value()
                + u * v.u.derivative(1, 0)
                - ut * v.u.derivative(0, 1)
                - cv * v.v.derivative(1, 0)
                - cvt * v.v.derivative(0, 1)
                - inv_m * pot.jet(x, y).derivative(1, 0)
        });
        return Ok(Residual::new(vec![f], true));
    }
    let vg = potential.to_grid(domain)?;
    let [u, ut, v, vt] = vel.to_grids(domain)?;
    let f = interior(domain, |i, j| {
        d * (u.dxx_at(i, j) - u.dxtxt_at(i, j))
            + u.at(i, j) * u.dx_at(i, j)
            - ut.at(i, j) * u.dxt_at(i, j)
            - v.at(i, j) * v.dx_at(i, j)
            - vt.at(i, j) * v.dxt_at(i, j)
            - inv_m * vg.dx_at(i, j)
    });
    Ok(Residual::new(vec![f], false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::EquilibriumSolution;
    use crate::fields::smooth::{Field2D, LinearField, Polynomial2D};
    use crate::fields::velocity::velocities_from_rs;

    fn closed(p: Polynomial2D) -> ScalarField2D {
        ScalarField2D::closed(p)
    }

    struct Eq {
        params: PhysicalParams,
        sol: EquilibriumSolution,
        vel: VelocityFields,
        density: ScalarField2D,
        drifts: DriftSet,
    }

    fn equilibrium(bb: f64) -> Eq {
        let params = PhysicalParams::from_beta_bar(bb).unwrap();
        let sol = EquilibriumSolution::new(params);
        let vel = velocities_from_rs(&closed(sol.r_polynomial()), &closed(sol.s_polynomial()), &params).unwrap();
        Eq {
            params,
            sol,
            vel,
            density: ScalarField2D::closed(sol.density()),
            drifts: DriftSet::equilibrium(&params),
        }
    }

    fn domain() -> GridSpec {
        GridSpec::new(4.0, 0.1).unwrap()
    }

    #[test]
    fn default_domain_keeps_density_positive() {
        for bb in [0.1, 0.25, 0.5, 1.0, 3.0, f64::INFINITY] {
            let e = equilibrium(bb);
            let dom = default_domain(&e.params, Some(0.05)).unwrap();
            let l = dom.half_width();
            assert!(Field2D::value(&e.sol.density(), l, -l) > 1e-300, "β̄={bb}");
            assert!(osmotic_residual(&e.vel, &e.density, &e.params, &dom).is_ok());
        }
        let p = PhysicalParams::from_beta_bar(1.0).unwrap();
        let dom = default_domain(&p, None).unwrap();
        assert!((dom.half_width() - 6.0 * 1.0819767068693265f64.sqrt()).abs() < 0.005);
        assert_eq!(dom.spacing(), 0.005);
    }

    #[test]
    fn closed_form_equilibrium_residuals_vanish() {
        for bb in [0.5, 1.0, 3.0, f64::INFINITY] {
            let e = equilibrium(bb);
            let dom = domain();
            let pot = closed(e.sol.potential());
            let norms = [
                osmotic_residual(&e.vel, &e.density, &e.params, &dom).unwrap().norm,
                continuity_residual(&e.vel, &e.density, &e.params, &dom).unwrap().norm,
                fokker_planck_residual(&e.drifts, &e.density, &e.params, FpDirection::Forward, &dom).unwrap().norm,
                fokker_planck_residual(&e.drifts, &e.density, &e.params, FpDirection::Backward, &dom).unwrap().norm,
                kinematical_residual(&e.vel, &e.params, &dom).unwrap().norm,
                dynamical_residual(&e.vel, &pot, &e.params, &dom).unwrap().norm,
            ];
            for (k, n) in norms.iter().enumerate() {
                assert!(*n <= 1e-10, "β̄={bb} residual {k} = {n}");
            }
        }
    }

    #[test]
    fn perturbed_osmotic_velocity_is_detected() {
        let e = equilibrium(1.0);
        let sol = e.sol;
        // u + 0.1 ⇔ R + 0.1 x (ħ/m = 1)
        let vel = velocities_from_rs(
            &closed(sol.r_polynomial().with_term(1, 0, 0.1)),
            &closed(Polynomial2D::zero()),
            &e.params,
        )
        .unwrap();
        let r = osmotic_residual(&vel, &e.density, &e.params, &domain()).unwrap();
        assert!((r.norm - 0.1).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_density_is_an_error() {
        let e = equilibrium(1.0);
        let bad = closed(Polynomial2D::constant(1.0).with_term(2, 0, -1.0));
        assert!(matches!(
            osmotic_residual(&e.vel, &bad, &e.params, &domain()),
            Err(Error::NonPositiveDensity { .. })
        ));
        let bad_grid = GridField::sample(domain(), |x, _| x);
        assert!(matches!(
            fokker_planck_residual(&e.drifts, &bad_grid.into(), &e.params, FpDirection::Forward, &domain()),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn continuity_detects_divergence() {
        let p = PhysicalParams::default();
        // S = x²/2 + x̃²/2 ⇒ v = x, ṽ = −x̃, ∂v + ∂̃ṽ = 0
        let vel = velocities_from_rs(
            &closed(Polynomial2D::zero()),
            &closed(Polynomial2D::quadratic(0.5, 0.0, 0.5)),
            &p,
        )
        .unwrap();
        let flat = closed(Polynomial2D::constant(1.0));
        assert!(continuity_residual(&vel, &flat, &p, &domain()).unwrap().norm < 1e-14);
        // S = 0.3x² + 0.2 x̃² ⇒ ∂v + ∂̃ṽ = 0.6 − 0.4
        let vel = velocities_from_rs(
            &closed(Polynomial2D::zero()),
            &closed(Polynomial2D::quadratic(0.3, 0.0, 0.2)),
            &p,
        )
        .unwrap();
        let r = continuity_residual(&vel, &flat, &p, &domain()).unwrap();
        assert!((r.norm - 0.2).abs() < 1e-14);
    }

    #[test]
    fn kinematical_examples() {
        let p = PhysicalParams::default();
        let dom = GridSpec::new(1.0, 0.05).unwrap();
        let with = |r: Polynomial2D, s: Polynomial2D| velocities_from_rs(&closed(r), &closed(s), &p).unwrap();
        let e = equilibrium(1.0);
        assert_eq!(kinematical_residual(&e.vel, &p, &dom).unwrap().norm, 0.0);
        // v = x, ṽ = −x̃, u = ũ = 0
        let vel = with(Polynomial2D::zero(), Polynomial2D::quadratic(0.5, 0.0, 0.5));
        assert_eq!(kinematical_residual(&vel, &p, &dom).unwrap().norm, 0.0);
        // u = x, v = x ⇒ −∂(x²) = −2x, norm 2 on [−1, 1] (margin excluded)
        let vel = with(Polynomial2D::quadratic(0.5, 0.0, 0.0), Polynomial2D::quadratic(0.5, 0.0, 0.0));
        let r = kinematical_residual(&vel, &p, &dom).unwrap();
        let edge = dom.coord(dom.points() - 1 - RESIDUAL_MARGIN);
        assert!((r.norm - 2.0 * edge).abs() < 1e-12);
        let full = kinematical_residual(&vel, &p, &GridSpec::new(1.0 + 2.0 * 0.05, 0.05).unwrap()).unwrap();
        assert!((full.norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dynamical_examples() {
        let e = equilibrium(f64::INFINITY);
        let dom = domain();
        let pot = closed(e.sol.potential());
        assert!(dynamical_residual(&e.vel, &pot, &e.params, &dom).unwrap().norm < 1e-14);
        // removing the potential leaves u∂u − ũ∂̃u = ω²x
        let e = equilibrium(1.0);
        let r = dynamical_residual(&e.vel, &closed(Polynomial2D::zero()), &e.params, &dom).unwrap();
        let edge = dom.coord(dom.points() - 1 - RESIDUAL_MARGIN);
        assert!((r.norm - edge).abs() < 1e-12);
    }

    #[test]
    fn fp_sum_and_difference_structure() {
        // a generic non-equilibrium field pair so every term is nonzero
        let p = PhysicalParams::new(1.3, 0.9, 0.8, 1.0).unwrap();
        let r = Polynomial2D::quadratic(-0.6, 0.3, -0.4).with_term(1, 0, 0.2).with_term(2, 1, 0.01);
        let s = Polynomial2D::quadratic(0.1, -0.2, 0.05).with_term(3, 0, 0.02);
        let vel = velocities_from_rs(&closed(r.clone()), &closed(s.clone()), &p).unwrap();
        let drifts = DriftSet::from_rs(std::sync::Arc::new(r.clone()), std::sync::Arc::new(s), &p);
        let dens = ScalarField2D::closed(crate::fields::smooth::ExpField {
            log: std::sync::Arc::new(r.scaled(1.7)),
            scale: 1.0,
        });
        let dom = GridSpec::new(2.0, 0.1).unwrap();
        for density in [dens.clone(), ScalarField2D::Grid(dens.to_grid(&dom).unwrap())] {
            let vel = if density.is_closed() {
                vel.clone()
            } else {
                let [u, u_tilde, v, v_tilde] = vel.to_grids(&dom).unwrap();
                VelocityFields::Grid { u, u_tilde, v, v_tilde }
            };
            let f = fokker_planck_residual(&drifts, &density, &p, FpDirection::Forward, &dom).unwrap();
            let b = fokker_planck_residual(&drifts, &density, &p, FpDirection::Backward, &dom).unwrap();
            let c = continuity_residual(&vel, &density, &p, &dom).unwrap();
            let o = osmotic_divergence_residual(&vel, &density, &p, &dom).unwrap();
            assert!(f.norm > 1e-3 && c.norm > 1e-3 && o.norm > 1e-3, "{} {} {}", f.norm, c.norm, o.norm);
            let n = dom.points();
            for i in 0..n {
                for j in 0..n {
                    let (fv, bv) = (f.field().at(i, j), b.field().at(i, j));
                    assert!((fv + bv - 2.0 * c.field().at(i, j)).abs() < 1e-12);
                    assert!((fv - bv - 2.0 * o.field().at(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn residuals_are_linear_detectors() {
        let e = equilibrium(1.0);
        let dom = domain();
        let shift = |eps: f64| {
            let mut d = e.drifts.clone();
            let base = drift_b_linear(&e.params);
            d.b = std::sync::Arc::new(LinearField {
                coeff_x: base.coeff_x + eps,
                coeff_x_tilde: base.coeff_x_tilde,
                offset: eps,
            });
            fokker_planck_residual(&d, &e.density, &e.params, FpDirection::Forward, &dom).unwrap().norm
        };
        let (r1, r2) = (shift(0.01), shift(0.02));
        assert!(r1 > 1e-4);
        assert!((r2 / r1 - 2.0).abs() < 1e-10);
    }

    fn drift_b_linear(p: &PhysicalParams) -> LinearField {
        let f = p.thermal_factors();
        LinearField::new(-p.omega() * f.coth_half, p.omega() * f.csch_half)
    }

    /// Cubic fields make every stencil inexact; the grid residual must
    /// approach the exact closed-form one at second order.
    #[test]
    fn grid_residuals_converge_at_second_order() {
        let p = PhysicalParams::default();
        let r = Polynomial2D::quadratic(-0.5, 0.2, -0.5).with_term(3, 0, 0.05).with_term(1, 2, -0.03);
        let s = Polynomial2D::quadratic(0.2, 0.1, -0.1).with_term(0, 3, 0.04).with_term(2, 1, 0.02);
        let pot = Polynomial2D::zero().with_term(2, 0, 0.5).with_term(3, 0, 0.1);
        let vel = velocities_from_rs(&closed(r.clone()), &closed(s.clone()), &p).unwrap();
        let drifts = DriftSet::from_rs(std::sync::Arc::new(r.clone()), std::sync::Arc::new(s.clone()), &p);
        let dens = ScalarField2D::closed(crate::fields::smooth::ExpField {
            log: std::sync::Arc::new(r.scaled(2.0)),
            scale: 1.0,
        });
        type Run<'a> = dyn Fn(&VelocityFields, &ScalarField2D, &GridSpec) -> Residual + 'a;
        let runs: Vec<(&str, Box<Run<'_>>)> = vec![
            ("osmotic", Box::new(|v: &VelocityFields, d: &ScalarField2D, g: &GridSpec| osmotic_residual(v, d, &p, g).unwrap())),
            ("continuity", Box::new(|v: &VelocityFields, d: &ScalarField2D, g: &GridSpec| continuity_residual(v, d, &p, g).unwrap())),
            ("fp", Box::new(|_: &VelocityFields, d: &ScalarField2D, g: &GridSpec| fokker_planck_residual(&drifts, d, &p, FpDirection::Forward, g).unwrap())),
            ("kinematical", Box::new(|v: &VelocityFields, _: &ScalarField2D, g: &GridSpec| kinematical_residual(v, &p, g).unwrap())),
            ("dynamical", Box::new(|v: &VelocityFields, _: &ScalarField2D, g: &GridSpec| dynamical_residual(v, &closed(pot.clone()), &p, g).unwrap())),
        ];
        for (name, run) in runs {
            let mut errs = Vec::new();
            for h in [0.1, 0.05] {
                let g = GridSpec::new(1.5, h).unwrap();
                let exact = run(&vel, &dens, &g);
                let rg = ScalarField2D::Grid(GridField::sample(g, |x, y| r.eval(x, y)));
                let sg = ScalarField2D::Grid(GridField::sample(g, |x, y| s.eval(x, y)));
                let gvel = velocities_from_rs(&rg, &sg, &p).unwrap();
                let gd = ScalarField2D::Grid(dens.to_grid(&g).unwrap());
                let approx = run(&gvel, &gd, &g);
                // compare on the coarse lattice's nodes
                let stride = if h == 0.1 { 1 } else { 2 };
                let coarse = GridSpec::new(1.5, 0.1).unwrap();
                let mut err: f64 = 0.0;
                for i in RESIDUAL_MARGIN + 1..coarse.points() - RESIDUAL_MARGIN - 1 {
                    for j in RESIDUAL_MARGIN + 1..coarse.points() - RESIDUAL_MARGIN - 1 {
                        let (a, b) = (i * stride, j * stride);
                        err = err.max((approx.field().at(a, b) - exact.field().at(a, b)).abs());
                    }
                }
                errs.push(err);
            }
            assert!(errs[0] / errs[1] >= 3.8, "{name}: {errs:?}");
        }
    }
}
