use nelson_tfd::analytic::{drift_eq, stationary_covariance, EquilibriumSolution};
use nelson_tfd::error::Error;
use nelson_tfd::fields::{
    default_domain, fokker_planck_residual, mean_derivative_check, osmotic_residual,
    velocities_from_rs, FpDirection, GridField, GridSpec, LinearField, Polynomial2D,
    ScalarField2D,
};
use nelson_tfd::params::PhysicalParams;
use nelson_tfd::sde::{simulate_ensemble, DriftSet, Ensemble, EnsembleConfig};

fn equilibrium(bb: f64) -> (PhysicalParams, EquilibriumSolution) {
    let p = PhysicalParams::from_beta_bar(bb).unwrap();
    (p, EquilibriumSolution::new(p))
}

fn gridded(sol: &EquilibriumSolution, spec: &GridSpec) -> (ScalarField2D, ScalarField2D, ScalarField2D) {
    let g = |f: ScalarField2D| -> ScalarField2D { f.to_grid(spec).unwrap().into() };
    (
        g(ScalarField2D::closed(sol.r_polynomial())),
        g(ScalarField2D::closed(sol.s_polynomial())),
        g(ScalarField2D::closed(sol.density())),
    )
}

#[test]
fn osmotic_grid_residual_is_second_order() {
    let (p, sol) = equilibrium(1.0);
    let coarse = default_domain(&p, Some(0.02)).unwrap();
    let fine = coarse.refined();
    let norm = |spec: &GridSpec| {
        let (r, s, dens) = gridded(&sol, spec);
        let vel = velocities_from_rs(&r, &s, &p).unwrap();
        osmotic_residual(&vel, &dens, &p, spec).unwrap().norm
    };
    let ratio = norm(&coarse) / norm(&fine);
    assert!((3.8..4.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn fokker_planck_residual_on_default_grid() {
    let (p, sol) = equilibrium(1.0);
    let spec = default_domain(&p, None).unwrap();
    assert!((spec.half_width() - 6.0 * stationary_covariance(&p).var_x.sqrt()).abs() < spec.spacing());
    let dens: ScalarField2D = ScalarField2D::closed(sol.density()).to_grid(&spec).unwrap().into();
    let drifts = DriftSet::equilibrium(&p);
    for dir in [FpDirection::Forward, FpDirection::Backward] {
        let r = fokker_planck_residual(&drifts, &dens, &p, dir, &spec).unwrap();
        // measured 9.5e-6 at h = 0.005
        assert!(r.norm <= 1e-5, "{dir:?}: {}", r.norm);
    }
}

#[test]
fn equilibrium_velocities_match_drifts() {
    for bb in [0.5, 2.0, f64::INFINITY] {
        let (p, sol) = equilibrium(bb);
        let vel = velocities_from_rs(
            &ScalarField2D::closed(sol.r_polynomial()),
            &ScalarField2D::closed(sol.s_polynomial()),
            &p,
        )
        .unwrap();
        for &(x, y) in &[(0.3, -1.1), (-2.0, 0.5), (1.0, 1.0)] {
            let j = vel.jets(x, y).unwrap();
            let d = drift_eq(x, y, &p);
            assert!((j.u.value() - d.osmotic()).abs() < 1e-13);
            assert!((j.u_tilde.value() - d.osmotic_tilde()).abs() < 1e-13);
            assert_eq!(j.v.value(), 0.0);
            assert_eq!(j.v_tilde.value(), 0.0);
        }
    }
}

#[test]
fn velocities_of_simple_fields() {
    let p = PhysicalParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
    // R = −x²/2, S = 3x̃ → u = −x/2, ṽ = −3/2
    let r = ScalarField2D::closed(Polynomial2D::zero().with_term(2, 0, -0.5));
    let s = ScalarField2D::closed(LinearField::new(0.0, 3.0));
    let vel = velocities_from_rs(&r, &s, &p).unwrap();
    let j = vel.jets(0.8, -0.4).unwrap();
    assert!((j.u.value() + 0.4).abs() < 1e-15);
    assert_eq!(j.u_tilde.value(), 0.0);
    assert_eq!(j.v.value(), 0.0);
    assert!((j.v_tilde.value() + 1.5).abs() < 1e-15);

    // the grid path agrees with the closed form
    let spec = GridSpec::new(2.0, 0.05).unwrap();
    let [u, _, _, vt] = velocities_from_rs(&r.to_grid(&spec).unwrap().into(), &s, &p)
        .unwrap()
        .to_grids(&spec)
        .unwrap();
    let mid = spec.points() / 2;
    assert!((u.at(mid + 10, mid) - (-0.5 * spec.coord(mid + 10))).abs() < 1e-12);
    assert!((vt.at(mid, mid + 3) + 1.5).abs() < 1e-12);
}

#[test]
fn under_resolved_grid_is_rejected() {
    let p = PhysicalParams::from_beta_bar(1.0).unwrap();
    let spec = GridSpec::new(3.0, 0.5).unwrap();
    let r: ScalarField2D = GridField::sample(spec, |x, y| (3.0 * x).sin() + y).into();
    let s = ScalarField2D::closed(Polynomial2D::zero());
    assert!(matches!(
        velocities_from_rs(&r, &s, &p),
        Err(Error::GridTooCoarse { .. })
    ));
}

fn stationary_ensemble(p: PhysicalParams, seed: u64) -> Ensemble {
    simulate_ensemble(&EnsembleConfig::new(p, 100_000, 1e-3, 0.0, seed)).unwrap()
}

#[test]
fn mean_derivative_of_coordinates_is_the_drift() {
    let p = PhysicalParams::from_beta_bar(1.0).unwrap();
    let ens = stationary_ensemble(p, 41);
    let drifts = DriftSet::equilibrium(&p);
    for (name, f) in [("x", LinearField::new(1.0, 0.0)), ("x̃", LinearField::new(0.0, 1.0))] {
        let rep = mean_derivative_check(&ens, &f, &drifts, &p, 1e-3).unwrap();
        let limit = rep.bonferroni_threshold(0.01);
        let worst = rep.worst();
        assert!(rep.cells.len() > 50);
        assert!(worst.z <= limit, "{name}: z {} > {limit} at {:?}", worst.z, worst.center);
    }
}

#[test]
fn mean_derivative_of_constant_vanishes() {
    let p = PhysicalParams::from_beta_bar(2.0).unwrap();
    let ens = stationary_ensemble(p, 42);
    let rep = mean_derivative_check(&ens, &Polynomial2D::constant(7.0), &DriftSet::equilibrium(&p), &p, 1e-3)
        .unwrap();
    for c in &rep.cells {
        assert_eq!(c.empirical.value, 0.0);
        assert_eq!(c.analytic, 0.0);
    }
}

#[test]
fn mean_derivative_of_quadratics() {
    let p = PhysicalParams::from_beta_bar(1.0).unwrap();
    let ens = stationary_ensemble(p, 43);
    let drifts = DriftSet::equilibrium(&p);
    let hbar_over_m = p.hbar() / p.mass();

    let xx = Polynomial2D::zero().with_term(2, 0, 1.0);
    let rep = mean_derivative_check(&ens, &xx, &drifts, &p, 1e-3).unwrap();
    let origin = rep.cell_at(0.0, 0.0).unwrap();
    assert!(origin.empirical.within(hbar_over_m, 3.0), "{origin:?}");
    assert!(rep.worst().z <= rep.bonferroni_threshold(0.01));

    // the tilde diffusion enters with the opposite sign
    let tt = Polynomial2D::zero().with_term(0, 2, 1.0);
    let rep = mean_derivative_check(&ens, &tt, &drifts, &p, 1e-3).unwrap();
    let origin = rep.cell_at(0.0, 0.0).unwrap();
    assert!(origin.empirical.within(-hbar_over_m, 3.0), "{origin:?}");
    assert!(rep.worst().z <= rep.bonferroni_threshold(0.01));

    let xt = Polynomial2D::zero().with_term(1, 1, 1.0);
    let rep = mean_derivative_check(&ens, &xt, &drifts, &p, 1e-3).unwrap();
    assert!(rep.worst().z <= rep.bonferroni_threshold(0.01));
}

#[test]
fn mean_derivative_rejects_bad_dt() {
    let p = PhysicalParams::from_beta_bar(1.0).unwrap();
    let ens = simulate_ensemble(&EnsembleConfig::new(p, 10, 1e-3, 0.0, 1)).unwrap();
    let f = LinearField::new(1.0, 0.0);
    assert!(mean_derivative_check(&ens, &f, &DriftSet::equilibrium(&p), &p, 0.0).is_err());
}
