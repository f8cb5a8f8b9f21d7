//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nelson_tfd::sde::{Dynamics, Init};
use nelson_tfd::stats::{Coordinate, SampleSlice, DEFAULT_BINS};
use nelson_tfd::{PhysicalParams, ThermalPoint};
use sha2::{Digest, Sha256};

use crate::Failure;

const KEYS: &[&str] = &[
    "mass",
    "omega",
    "hbar",
    "beta",
    "beta_bar",
    "paths",
    "dt",
    "horizon",
    "seed",
    "init",
    "x0",
    "x_tilde0",
    "burn_in",
    "group",
    "dump_paths",
    "dump_every",
    "record_every",
    "bins",
    "range",
    "slice",
    "coordinate",
    "sweep",
    "grid_spacing",
    "threads",
    "out",
];

/// Keys that do not change any output byte and stay out of the hash.
const UNHASHED: &[&str] = &["threads", "out"];

/// Raw settings in the order they were resolved; later sources override.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Failure::Config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Failure::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key));
        self.values.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, Failure> {
        self.get(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    fn integer<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, Failure> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Failure::Config(format!("`{key}`: expected a non-negative integer, got `{v}`"))),
        }
    }

    /// SHA-256 of the sorted settings that affect output.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.values {
            if !UNHASHED.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n"));
            }
        }
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, Failure> {
    match v.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        s => s
            .parse()
            .map_err(|_| Failure::Config(format!("`{key}`: expected a number, got `{v}`"))),
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub init: Init,
    pub dynamics: Dynamics,
    pub dump_paths: usize,
    pub dump_every: usize,
    pub record_every: usize,
    pub bins: usize,
    /// Histogram half-width; `None` uses `5·sqrt(var_x)`.
    pub range: Option<f64>,
    pub slice: SampleSlice,
    pub coordinate: Coordinate,
    /// `None` when no sweep was given; the run's own β̄ is used then.
    pub sweep: Option<Vec<f64>>,
    /// Fine lattice spacing of the residual report.
    pub grid_spacing: Option<f64>,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub hash: String,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, Failure> {
        let mut warnings = Vec::new();
        let mass = s.number("mass", 1.0)?;
        let omega = s.number("omega", 1.0)?;
        let hbar = s.number("hbar", 1.0)?;
        let base = PhysicalParams::new(mass, omega, hbar, 1.0).map_err(Failure::from)?;
        let params = match (s.get("beta_bar"), s.get("beta")) {
            (Some(bb), beta) => {
                if beta.is_some() {
                    warnings.push("both beta and beta_bar given; using beta_bar".to_string());
                }
                base.with_beta_bar(parse_f64("beta_bar", bb)?)
            }
            (None, Some(b)) => PhysicalParams::new(mass, omega, hbar, parse_f64("beta", b)?),
            (None, None) => base.with_beta_bar(1.0),
        }
        .map_err(Failure::from)?;

        let start = ThermalPoint::new(s.number("x0", 0.0)?, s.number("x_tilde0", 0.0)?, 0.0);
        let init = match s.get("init").unwrap_or("stationary") {
            "stationary" => Init::StationaryExact,
            "point" => Init::Point(start),
            "burn_in" => Init::BurnIn {
                start,
                duration: s.get("burn_in").map(|v| parse_f64("burn_in", v)).transpose()?,
            },
            other => {
                return Err(Failure::Config(format!(
                    "`init`: expected stationary, point or burn_in, got `{other}`"
                )))
            }
        };
        let dynamics = match s.get("group").unwrap_or("forward") {
            "forward" => Dynamics::ForwardGroup,
            "backward" => Dynamics::BackwardGroup,
            "transformed" => Dynamics::Transformed,
            other => {
                return Err(Failure::Config(format!(
                    "`group`: expected forward, backward or transformed, got `{other}`"
                )))
            }
        };
        let slice = match s.get("slice").unwrap_or("final") {
            "final" => SampleSlice::Final,
            "pooled" => SampleSlice::Pooled,
            other => return Err(Failure::Config(format!("`slice`: expected final or pooled, got `{other}`"))),
        };
        let coordinate = match s.get("coordinate").unwrap_or("x") {
            "x" => Coordinate::X,
            "x_tilde" => Coordinate::XTilde,
            other => return Err(Failure::Config(format!("`coordinate`: expected x or x_tilde, got `{other}`"))),
        };
        let sweep = s
            .get("sweep")
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_f64("sweep", t))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let range = s.get("range").map(|v| parse_f64("range", v)).transpose()?;
        if let Some(r) = range {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Failure::Config(format!("`range`: must be > 0, got {r}")));
            }
        }
        let grid_spacing = s.get("grid_spacing").map(|v| parse_f64("grid_spacing", v)).transpose()?;
        let threads = s.get("threads").map(|_| s.integer("threads", 0usize)).transpose()?;
        if threads == Some(0) {
            return Err(Failure::Config("`threads`: must be at least 1".into()));
        }

        Ok(RunConfig {
            params,
            n_paths: s.integer("paths", 100_000)?,
            dt: s.number("dt", 1e-3)?,
            horizon: s.number("horizon", 10.0)?,
            seed: s.integer("seed", 1)?,
            init,
            dynamics,
            dump_paths: s.integer("dump_paths", 1)?,
            dump_every: s.integer("dump_every", 10)?,
            record_every: s.integer("record_every", 100)?,
            bins: s.integer("bins", DEFAULT_BINS)?,
            range,
            slice,
            coordinate,
            sweep,
            grid_spacing,
            threads,
            out: PathBuf::from(s.get("out").unwrap_or(".")),
            hash: s.hash(),
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let s = Settings::parse("# run\n\nbeta_bar = 3   # cold\npaths=10\n").unwrap();
        let c = RunConfig::resolve(&s).unwrap();
        assert_eq!(c.params.beta_bar(), 3.0);
        assert_eq!(c.n_paths, 10);
        assert_eq!(c.dt, 1e-3);
    }

    #[test]
    fn beta_bar_wins_over_beta() {
        let s = Settings::parse("hbar = 2\nbeta = 5\nbeta_bar = 0.5\n").unwrap();
        let c = RunConfig::resolve(&s).unwrap();
        assert_eq!(c.params.beta_bar(), 0.5);
        assert_eq!(c.warnings.len(), 1);

        let s = Settings::parse("hbar = 2\nbeta = 5\n").unwrap();
        assert_eq!(RunConfig::resolve(&s).unwrap().params.beta_bar(), 10.0);
    }

    #[test]
    fn infinite_temperature_keys() {
        let s = Settings::parse("beta = inf").unwrap();
        assert!(RunConfig::resolve(&s).unwrap().params.is_zero_temperature());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Settings::parse("colour = red").is_err());
        assert!(Settings::parse("dt = 1\ndt = 2").is_err());
        assert!(Settings::parse("just words").is_err());
        for text in ["dt = fast", "group = sideways", "paths = -3", "beta_bar = 0", "threads = 0"] {
            let s = Settings::parse(text).unwrap();
            assert!(RunConfig::resolve(&s).is_err(), "{text}");
        }
    }

    #[test]
    fn empty_sweep_is_kept_empty() {
        let s = Settings::parse("sweep = ").unwrap();
        assert_eq!(RunConfig::resolve(&s).unwrap().sweep, Some(vec![]));
        let s = Settings::parse("sweep = 1, inf").unwrap();
        assert_eq!(RunConfig::resolve(&s).unwrap().sweep, Some(vec![1.0, f64::INFINITY]));
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a = Settings::parse("dt = 0.01").unwrap();
        let b = a.clone();
        a.set("out", "/tmp/elsewhere");
        a.set("threads", "3");
        assert_eq!(a.hash(), b.hash());
        a.set("seed", "9");
        assert_ne!(a.hash(), b.hash());
    }
}
