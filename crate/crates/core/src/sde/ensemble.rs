//! Seeded ensembles of independent paths.

use rayon::prelude::*;

use super::drift::DriftSet;
use super::rng::{PathNoise, Purpose};
use super::sample::sample_gaussian;
use super::step::{check_dt, Group, Stepper};
use super::transformed::{transformed_stationary_covariance, TransformedStepper};
use crate::analytic::{ground_state_variance, stationary_covariance};
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, ThermalPoint};
use crate::stats::MomentSums;

/// Paths per parallel work item. Fixed so that results do not depend on the
/// number of worker threads.
const CHUNK: usize = 64;

/// How each path's starting point is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Exact draw from the stationary Gaussian of the chosen dynamics.
    StationaryExact,
    Point(ThermalPoint),
    /// Start at a point and discard `duration` (default `10/ω`) of evolution.
    BurnIn {
        start: ThermalPoint,
        duration: Option<f64>,
    },
}

/// Which equations the ensemble integrates.
///
/// For [`Dynamics::Transformed`] the stored points hold `(X, X̃)` in the
/// `x`/`x_tilde` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    #[default]
    ForwardGroup,
    BackwardGroup,
    Transformed,
}

impl Dynamics {
    pub fn name(&self) -> &'static str {
        match self {
            Dynamics::ForwardGroup => "forward",
            Dynamics::BackwardGroup => "backward",
            Dynamics::Transformed => "transformed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub params: PhysicalParams,
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub base_seed: u64,
    pub init: Init,
    pub dynamics: Dynamics,
    /// `None` uses the equilibrium drifts of `params`.
    pub drifts: Option<DriftSet>,
    /// Moments are accumulated every this many steps (and at the final step);
    /// 0 records only the initial and final points.
    pub record_every: usize,
    /// Keep every recorded point, not just the final ones.
    pub pool_samples: bool,
    /// Number of leading paths whose trajectories are kept.
    pub dump_paths: usize,
    /// Thinning of kept trajectories.
    pub dump_every: usize,
}

impl EnsembleConfig {
    pub fn new(params: PhysicalParams, n_paths: usize, dt: f64, horizon: f64, base_seed: u64) -> Self {
        EnsembleConfig {
            params,
            n_paths,
            dt,
            horizon,
            base_seed,
            init: Init::StationaryExact,
            dynamics: Dynamics::ForwardGroup,
            drifts: None,
            record_every: 0,
            pool_samples: false,
            dump_paths: 0,
            dump_every: 1,
        }
    }

    /// `floor(T/dt)`, tolerant of `T/dt` landing just below an integer.
    pub fn n_steps(&self) -> usize {
        steps_for(self.horizon, self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths", "need at least one path"));
        }
        check_dt(self.dt)?;
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be finite and ≥ 0, got {}", self.horizon)));
        }
        if self.dump_every == 0 {
            return Err(Error::invalid("dump_every", "must be at least 1"));
        }
        if let Init::BurnIn { duration: Some(d), .. } = self.init {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid("burn_in", format!("must be finite and ≥ 0, got {d}")));
            }
        }
        Ok(())
    }

    /// Steps whose state enters the moment timeline.
    fn record_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut steps: Vec<usize> = match self.record_every {
            0 => vec![0],
            k => (0..=n).step_by(k).collect(),
        };
        if *steps.last().expect("non-empty") != n {
            steps.push(n);
        }
        steps
    }
}

fn steps_for(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize
}

/// One stored trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub index: u64,
    pub base_seed: u64,
    pub dynamics: Dynamics,
    pub dt: f64,
    /// Steps between stored points.
    pub every: usize,
    pub points: Vec<ThermalPoint>,
}

enum Kernel<'a> {
    Group(Stepper<'a>),
    Transformed(TransformedStepper, f64),
}

impl Kernel<'_> {
    #[inline]
    fn step(&self, p: &ThermalPoint, noise: &mut PathNoise) -> Result<ThermalPoint> {
        let (a, b) = noise.normals();
        match self {
            Kernel::Group(s) => s.advance(p, a, b),
            Kernel::Transformed(s, dt) => {
                let (x, y) = s.advance(p.x, p.x_tilde, a, b)?;
                Ok(ThermalPoint::new(x, y, p.t + dt))
            }
        }
    }
}

struct PathOutput {
    last: ThermalPoint,
    sums: MomentSums,
}

struct Runner<'a> {
    cfg: &'a EnsembleConfig,
    kernel: Kernel<'a>,
    record_steps: Vec<usize>,
    n_steps: usize,
    burn_in_steps: usize,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a EnsembleConfig, drifts: &'a DriftSet) -> Self {
        let kernel = match cfg.dynamics {
            Dynamics::ForwardGroup => Kernel::Group(Stepper::new(drifts, Group::Forward, cfg.dt, &cfg.params)),
            Dynamics::BackwardGroup => Kernel::Group(Stepper::new(drifts, Group::Backward, cfg.dt, &cfg.params)),
            Dynamics::Transformed => Kernel::Transformed(TransformedStepper::new(&cfg.params, cfg.dt), cfg.dt),
        };
        let burn_in_steps = match cfg.init {
            Init::BurnIn { duration, .. } => {
                steps_for(duration.unwrap_or(10.0 / cfg.params.omega()), cfg.dt)
            }
            _ => 0,
        };
        Runner {
            cfg,
            kernel,
            record_steps: cfg.record_steps(),
            n_steps: cfg.n_steps(),
            burn_in_steps,
        }
    }

    fn initial(&self, index: u64) -> ThermalPoint {
        let p = &self.cfg.params;
        match self.cfg.init {
            Init::StationaryExact => {
                let cov = match self.cfg.dynamics {
                    Dynamics::Transformed => transformed_stationary_covariance(p),
                    _ => stationary_covariance(p),
                };
                let mut noise = PathNoise::new(self.cfg.base_seed, Purpose::Initial, index);
                let (x, y) = sample_gaussian(&cov, ground_state_variance(p), &mut noise);
                ThermalPoint::new(x, y, 0.0)
            }
            Init::Point(pt) => pt,
            Init::BurnIn { start, .. } => start,
        }
    }

    /// Runs path `index`, feeding recorded points to `record(slot, point)`
    /// and thinned trajectory points to `dump`.
    fn run(
        &self,
        index: u64,
        mut record: impl FnMut(usize, &ThermalPoint),
        mut dump: Option<&mut Vec<ThermalPoint>>,
    ) -> Result<PathOutput> {
        let mut noise = PathNoise::new(self.cfg.base_seed, Purpose::Dynamics, index);
        let diverged = |step: usize| move |e: Error| match e {
            Error::StepDiverged => Error::Diverged { path: index, step },
            other => other,
        };
        let mut p = self.initial(index);
        for k in 0..self.burn_in_steps {
            p = self.kernel.step(&p, &mut noise).map_err(diverged(k + 1))?;
        }
        p.t = 0.0;
        let mut sums = MomentSums::new();
        let mut next = 0;
        let every = self.cfg.dump_every;
        for k in 0..=self.n_steps {
            if k > 0 {
                p = self.kernel.step(&p, &mut noise).map_err(diverged(self.burn_in_steps + k))?;
            }
            if self.record_steps.get(next) == Some(&k) {
                sums.push(p.x, p.x_tilde);
                record(next, &p);
                next += 1;
            }
            if let Some(d) = dump.as_deref_mut() {
                if k % every == 0 || k == self.n_steps {
                    d.push(p);
                }
            }
        }
        Ok(PathOutput { last: p, sums })
    }
}

#[derive(Default)]
struct Chunk {
    finals: Vec<ThermalPoint>,
    pooled: Vec<ThermalPoint>,
    path_sums: Vec<MomentSums>,
    timeline: Vec<MomentSums>,
    dumps: Vec<Path>,
}

/// Result of [`simulate_ensemble`].
#[derive(Debug, Clone)]
pub struct Ensemble {
    params: PhysicalParams,
    dynamics: Dynamics,
    dt: f64,
    horizon: f64,
    base_seed: u64,
    final_points: Vec<ThermalPoint>,
    pooled: Option<Vec<ThermalPoint>>,
    pooled_per_path: usize,
    path_sums: Vec<MomentSums>,
    timeline: Vec<(f64, MomentSums)>,
    dumped: Vec<Path>,
}

impl Ensemble {
    /// An ensemble holding only final points, e.g. exact stationary draws.
    pub fn from_final_points(params: PhysicalParams, points: Vec<ThermalPoint>) -> Self {
        let path_sums = points.iter().map(|p| MomentSums::from_points([p])).collect();
        let total = MomentSums::from_points(&points);
        Ensemble {
            params,
            dynamics: Dynamics::ForwardGroup,
            dt: 0.0,
            horizon: 0.0,
            base_seed: 0,
            final_points: points,
            pooled: None,
            pooled_per_path: 1,
            path_sums,
            timeline: vec![(0.0, total)],
            dumped: Vec::new(),
        }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn dynamics(&self) -> Dynamics {
        self.dynamics
    }

    pub fn n_paths(&self) -> usize {
        self.final_points.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn final_points(&self) -> &[ThermalPoint] {
        &self.final_points
    }

    /// All recorded points, path-major; present when `pool_samples` was set.
    pub fn pooled_points(&self) -> Option<&[ThermalPoint]> {
        self.pooled.as_deref()
    }

    pub fn pooled_per_path(&self) -> usize {
        self.pooled_per_path
    }

    /// Per-path power sums over the recorded times.
    pub fn path_sums(&self) -> &[MomentSums] {
        &self.path_sums
    }

    /// Ensemble power sums at each recorded time.
    pub fn timeline(&self) -> &[(f64, MomentSums)] {
        &self.timeline
    }

    pub fn dumped_paths(&self) -> &[Path] {
        &self.dumped
    }
}

/// Integrates `n_paths` independent paths.
///
/// Path `i` draws its noise from streams keyed by `(base_seed, i)`; the
/// output is bit-identical for any thread count or scheduling.
pub fn simulate_ensemble(cfg: &EnsembleConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let default_drifts;
    let drifts = match &cfg.drifts {
        Some(d) => d,
        None => {
            default_drifts = DriftSet::equilibrium(&cfg.params);
            &default_drifts
        }
    };
    let runner = Runner::new(cfg, drifts);
    let n_records = runner.record_steps.len();
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);

    let chunks: Vec<Result<Chunk>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut out = Chunk {
                timeline: vec![MomentSums::new(); n_records],
                ..Chunk::default()
            };
            for index in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_paths) {
                let mut trace = (index < cfg.dump_paths).then(Vec::new);
                let timeline = &mut out.timeline;
                let pooled = &mut out.pooled;
                let res = runner.run(
                    index as u64,
                    |slot, p| {
                        timeline[slot].push(p.x, p.x_tilde);
                        if cfg.pool_samples {
                            pooled.push(*p);
                        }
                    },
                    trace.as_mut(),
                )?;
                out.finals.push(res.last);
                out.path_sums.push(res.sums);
                if let Some(points) = trace {
                    out.dumps.push(Path {
                        index: index as u64,
                        base_seed: cfg.base_seed,
                        dynamics: cfg.dynamics,
                        dt: cfg.dt,
                        every: cfg.dump_every,
                        points,
                    });
                }
            }
            Ok(out)
        })
        .collect();

    let mut timeline = vec![MomentSums::new(); n_records];
    let mut final_points = Vec::with_capacity(cfg.n_paths);
    let mut path_sums = Vec::with_capacity(cfg.n_paths);
    let mut pooled = Vec::new();
    let mut dumped = Vec::new();
    for chunk in chunks {
        let chunk = chunk?;
        for (acc, s) in timeline.iter_mut().zip(chunk.timeline) {
            *acc += s;
        }
        final_points.extend(chunk.finals);
        path_sums.extend(chunk.path_sums);
        pooled.extend(chunk.pooled);
        dumped.extend(chunk.dumps);
    }
    let sign = if cfg.dynamics == Dynamics::BackwardGroup { -1.0 } else { 1.0 };
    let timeline = runner
        .record_steps
        .iter()
        .zip(timeline)
        .map(|(&k, s)| (sign * k as f64 * cfg.dt, s))
        .collect();
    Ok(Ensemble {
        params: cfg.params,
        dynamics: cfg.dynamics,
        dt: cfg.dt,
        horizon: cfg.horizon,
        base_seed: cfg.base_seed,
        final_points,
        pooled: cfg.pool_samples.then_some(pooled),
        pooled_per_path: n_records,
        path_sums,
        timeline,
        dumped,
    })
}

/// Full-resolution trajectory of path `index` of the ensemble `cfg`
/// describes; identical to the same path inside [`simulate_ensemble`].
pub fn simulate_path(cfg: &EnsembleConfig, index: u64) -> Result<Path> {
    cfg.validate()?;
    let eq;
    let drifts = match &cfg.drifts {
        Some(d) => d,
        None => {
            eq = DriftSet::equilibrium(&cfg.params);
            &eq
        }
    };
    let mut points = Vec::with_capacity(cfg.n_steps() + 1);
    let mut one = cfg.clone();
    one.dump_every = 1;
    Runner::new(&one, drifts).run(index, |_, _| {}, Some(&mut points))?;
    Ok(Path {
        index,
        base_seed: cfg.base_seed,
        dynamics: cfg.dynamics,
        dt: cfg.dt,
        every: 1,
        points,
    })
}
