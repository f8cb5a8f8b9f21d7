use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use nelson_tfd::analytic::EquilibriumSolution;
use nelson_tfd::fields::{
    continuity_residual, default_domain, dynamical_residual, fokker_planck_residual,
    kinematical_residual, osmotic_residual, velocities_from_rs, FpDirection, GridSpec, Residual,
    ScalarField2D,
};
use nelson_tfd::sde::{
    inverse_transform, simulate_ensemble, transform_coordinates, DriftSet, Dynamics, Ensemble,
    EnsembleConfig,
};
use nelson_tfd::stats::csv::{fmt_g, uncertainty_row, write_histogram, write_marginal, write_row, UNCERTAINTY_HEADER};
use nelson_tfd::stats::{
    default_range, distribution_test, marginal_histogram, uncertainty_estimate, GaussianMarginal,
    MomentSums, SampleSlice,
};
use nelson_tfd::{Error, PhysicalParams};

use crate::config::RunConfig;
use crate::Failure;

/// Closed-form residuals above this fail the report.
pub const CLOSED_TOLERANCE: f64 = 1e-10;
/// Lattice spacing, in units of `sqrt(ħ/mω)`, of the closed-form check.
const CLOSED_PROBE_SPACING: f64 = 0.05;
/// Smallest accepted error reduction when the spacing halves.
pub const MIN_RATIO: f64 = 3.8;
/// Grid residuals below this that do not shrink are rounding noise.
pub const ROUNDOFF: f64 = 1e-6;

struct Output {
    file: BufWriter<File>,
}

impl Output {
    fn create(cfg: &RunConfig, name: &str, command: &str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out)
            .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
        let path = cfg.out.join(name);
        let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut out = Output {
            file: BufWriter::new(file),
        };
        out.comment(&format!("nelson-tfd {} {command}", env!("CARGO_PKG_VERSION")))?;
        out.comment(&format!("seed={}", cfg.seed))?;
        out.comment(&format!("config_sha256={}", cfg.hash))?;
        Ok(out)
    }

    fn comment(&mut self, text: &str) -> Result<()> {
        writeln!(self.file, "# {text}")?;
        Ok(())
    }

    fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        write_row(&mut self.file, fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }
}

fn ensemble_config(cfg: &RunConfig, params: PhysicalParams) -> EnsembleConfig {
    let mut e = EnsembleConfig::new(params, cfg.n_paths, cfg.dt, cfg.horizon, cfg.seed);
    e.init = cfg.init;
    e.dynamics = cfg.dynamics;
    e.record_every = cfg.record_every;
    e.pool_samples = cfg.slice == SampleSlice::Pooled;
    e
}

fn simulate(e: &EnsembleConfig) -> Result<Ensemble> {
    e.validate().map_err(Failure::from)?;
    Ok(simulate_ensemble(e).map_err(Failure::from)?)
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params;
    let mut e = ensemble_config(cfg, p);
    e.dump_paths = cfg.dump_paths;
    e.dump_every = cfg.dump_every;
    let ens = simulate(&e)?;

    let mut out = Output::create(cfg, "paths.csv", "simulate")?;
    out.comment(&format!("beta_bar={},group={}", fmt_g(p.beta_bar()), cfg.dynamics.name()))?;
    out.row(&["path", "t", "x", "x_tilde", "X", "X_tilde"])?;
    for path in ens.dumped_paths() {
        for pt in &path.points {
            let ((x, xt), (bx, bxt)) = if cfg.dynamics == Dynamics::Transformed {
                (inverse_transform(pt.x, pt.x_tilde, &p), (pt.x, pt.x_tilde))
            } else {
                ((pt.x, pt.x_tilde), transform_coordinates(pt, &p))
            };
            out.row(&[path.index.to_string(), fmt_g(pt.t), fmt_g(x), fmt_g(xt), fmt_g(bx), fmt_g(bxt)])?;
        }
    }
    out.finish()?;

    let mut out = Output::create(cfg, "moments.csv", "simulate")?;
    out.comment(&format!("beta_bar={},group={}", fmt_g(p.beta_bar()), cfg.dynamics.name()))?;
    out.row(&[
        "t",
        "samples",
        "mean_x",
        "mean_x_se",
        "mean_x_tilde",
        "mean_x_tilde_se",
        "var_x",
        "var_x_se",
        "var_x_tilde",
        "var_x_tilde_se",
        "cov",
        "cov_se",
    ])?;
    for (t, sums) in ens.timeline() {
        out.row(&moment_row(*t, sums))?;
    }
    out.finish()
}

fn moment_row(t: f64, sums: &MomentSums) -> Vec<String> {
    let mut row = vec![fmt_g(t), sums.count().to_string()];
    match sums.delta_estimates() {
        Ok(m) => {
            for e in m.as_array() {
                row.push(fmt_g(e.value));
                row.push(fmt_g(e.se));
            }
        }
        // a single path has a mean but no spread
        Err(_) => {
            row.push(fmt_g(sums.raw(1, 0)));
            row.push("nan".into());
            row.push(fmt_g(sums.raw(0, 1)));
            row.extend(std::iter::repeat_n("nan".to_string(), 7));
        }
    }
    row
}

pub fn histogram_cmd(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params;
    if cfg.bins < 2 {
        return Err(Failure::Config(format!("`bins`: need at least 2, got {}", cfg.bins)).into());
    }
    let ens = simulate(&ensemble_config(cfg, p))?;
    let range = cfg.range.map_or_else(|| default_range(&p), |r| (-r, r));
    let hist = marginal_histogram(&ens, cfg.coordinate, cfg.bins, range, cfg.slice).map_err(Failure::from)?;
    let marginal = GaussianMarginal::equilibrium(&p);
    let test = match distribution_test(&hist, &marginal) {
        Ok(t) => Some(t),
        Err(Error::DegenerateBins(_)) => None,
        Err(e) => return Err(Failure::from(e).into()),
    };

    let coord = match cfg.coordinate {
        nelson_tfd::stats::Coordinate::X => "x",
        nelson_tfd::stats::Coordinate::XTilde => "x_tilde",
    };
    let mut out = Output::create(cfg, "histogram.csv", "histogram")?;
    out.comment(&format!("beta_bar={},coordinate={coord}", fmt_g(p.beta_bar())))?;
    write_histogram(&mut out.file, &hist, test.as_ref())?;
    if test.is_none() {
        out.comment("chi_square=skipped: too few samples for expected counts >= 5")?;
    }
    out.finish()?;

    let mut out = Output::create(cfg, "analytic.csv", "histogram")?;
    out.comment(&format!(
        "beta_bar={},variance={}",
        fmt_g(p.beta_bar()),
        fmt_g(marginal.variance)
    ))?;
    write_marginal(&mut out.file, &hist, &marginal)?;
    out.finish()
}

pub fn uncertainty_cmd(cfg: &RunConfig) -> Result<()> {
    let sweep = cfg.sweep.clone().unwrap_or_else(|| vec![cfg.params.beta_bar()]);
    if sweep.is_empty() {
        return Err(Failure::Config("`sweep`: no β̄ values given".into()).into());
    }
    let mut rows = Vec::with_capacity(sweep.len());
    for bb in sweep {
        let p = cfg.params.with_beta_bar(bb).map_err(Failure::from)?;
        let ens = simulate(&ensemble_config(cfg, p))?;
        let drifts = DriftSet::equilibrium(&p);
        let report = uncertainty_estimate(&ens, &drifts, &p, cfg.slice).map_err(Failure::from)?;
        rows.push(uncertainty_row(&report));
    }
    let mut out = Output::create(cfg, "uncertainty.csv", "uncertainty")?;
    out.comment(&format!("hbar={}", fmt_g(cfg.params.hbar())))?;
    out.row(&UNCERTAINTY_HEADER)?;
    for r in rows {
        out.row(&r)?;
    }
    out.finish()
}

struct Fields {
    r: ScalarField2D,
    s: ScalarField2D,
    density: ScalarField2D,
    potential: ScalarField2D,
}

impl Fields {
    fn closed(sol: &EquilibriumSolution) -> Self {
        Fields {
            r: ScalarField2D::closed(sol.r_polynomial()),
            s: ScalarField2D::closed(sol.s_polynomial()),
            density: ScalarField2D::closed(sol.density()),
            potential: ScalarField2D::closed(sol.potential()),
        }
    }

    fn sampled(&self, spec: &GridSpec) -> nelson_tfd::Result<Self> {
        Ok(Fields {
            r: self.r.to_grid(spec)?.into(),
            s: self.s.to_grid(spec)?.into(),
            density: self.density.to_grid(spec)?.into(),
            potential: self.potential.to_grid(spec)?.into(),
        })
    }

    fn residuals(&self, p: &PhysicalParams, domain: &GridSpec) -> nelson_tfd::Result<Vec<(&'static str, Residual)>> {
        let vel = velocities_from_rs(&self.r, &self.s, p)?;
        let drifts = DriftSet::equilibrium(p);
        Ok(vec![
            ("osmotic", osmotic_residual(&vel, &self.density, p, domain)?),
            ("continuity", continuity_residual(&vel, &self.density, p, domain)?),
            (
                "fokker_planck_forward",
                fokker_planck_residual(&drifts, &self.density, p, FpDirection::Forward, domain)?,
            ),
            (
                "fokker_planck_backward",
                fokker_planck_residual(&drifts, &self.density, p, FpDirection::Backward, domain)?,
            ),
            ("kinematical", kinematical_residual(&vel, p, domain)?),
            ("dynamical", dynamical_residual(&vel, &self.potential, p, domain)?),
        ])
    }
}

fn classify(closed: f64, coarse: f64, fine: f64) -> (f64, &'static str) {
    let ratio = coarse / fine;
    let status = if closed > CLOSED_TOLERANCE {
        "fail"
    } else if coarse.max(fine) <= ROUNDOFF && (ratio.is_nan() || ratio <= 1.0) {
        "rounding"
    } else if ratio >= MIN_RATIO {
        "second_order"
    } else {
        "fail"
    };
    (ratio, status)
}

pub fn residuals_cmd(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params;
    let sol = EquilibriumSolution::new(p);
    let h = cfg.grid_spacing.unwrap_or(nelson_tfd::fields::DEFAULT_SPACING * p.length_scale());
    if !(h > 0.0 && h.is_finite()) {
        return Err(Failure::Config(format!("`grid_spacing`: must be > 0, got {h}")).into());
    }
    let coarse = default_domain(&p, Some(2.0 * h)).map_err(Failure::from)?;
    let fine = coarse.refined();

    // closed-form jets do not depend on the lattice; a sparse one suffices
    let probe = GridSpec::new(fine.half_width(), CLOSED_PROBE_SPACING * p.length_scale()).map_err(Failure::from)?;
    let closed = Fields::closed(&sol);
    let exact = closed.residuals(&p, &probe).map_err(Failure::from)?;
    let on_coarse = closed.sampled(&coarse).and_then(|f| f.residuals(&p, &coarse)).map_err(Failure::from)?;
    let on_fine = closed.sampled(&fine).and_then(|f| f.residuals(&p, &fine)).map_err(Failure::from)?;

    let mut out = Output::create(cfg, "residuals.csv", "residuals")?;
    out.comment(&format!(
        "beta_bar={},half_width={},spacing={}",
        fmt_g(p.beta_bar()),
        fmt_g(fine.half_width()),
        fmt_g(fine.spacing())
    ))?;
    out.row(&["residual", "closed_norm", "grid_norm_2h", "grid_norm_h", "ratio", "status"])?;
    let mut failed = Vec::new();
    for (((name, e), (_, c)), (_, f)) in exact.iter().zip(&on_coarse).zip(&on_fine) {
        let (ratio, status) = classify(e.norm, c.norm, f.norm);
        if status == "fail" {
            failed.push(*name);
        }
        out.row(&[name.to_string(), fmt_g(e.norm), fmt_g(c.norm), fmt_g(f.norm), fmt_g(ratio), status.into()])?;
    }
    // x–x̃ coupling of the drifts, (ħ/m)·|∂²R/∂x∂x̃|
    let coupling = sol
        .r_polynomial()
        .terms()
        .iter()
        .filter(|&&(i, j, _)| (i, j) == (1, 1))
        .map(|&(_, _, c)| (p.diffusion() * c).abs())
        .sum::<f64>();
    out.row(&["cross_coupling".to_string(), fmt_g(coupling), String::new(), String::new(), String::new(), "exact".into()])?;
    out.finish()?;

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Convergence(format!("residuals failed their thresholds: {}", failed.join(", "))).into())
    }
}

pub fn written(cfg: &RunConfig, names: &[&str]) -> String {
    names
        .iter()
        .map(|n| Path::new(&cfg.out).join(n).display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
