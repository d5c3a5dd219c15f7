use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use itoext::integrate::ProjectionMode;
use itoext::projection::DyadicApproxParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PoissonExample,
    Isometry,
    Project,
    Qwiener,
    Prm,
    Spde,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PoissonExample => "poisson-example",
            Experiment::Isometry => "isometry",
            Experiment::Project => "project",
            Experiment::Qwiener => "qwiener",
            Experiment::Prm => "prm",
            Experiment::Spde => "spde",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    All,
    Wiener,
    Poisson,
    Qwiener,
    Prm,
}

/// Inclusive level range written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub lo: u32,
    pub hi: u32,
}

impl LevelRange {
    pub fn levels(&self) -> Vec<u32> {
        (self.lo..=self.hi).collect()
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got `{s}`"))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo = a.trim().parse().map_err(|_| format!("bad lower level in `{s}`"))?;
        let hi = b.trim().parse().map_err(|_| format!("bad upper level in `{s}`"))?;
        if lo > hi || hi > 40 {
            return Err(format!("levels `{s}` must satisfy a <= b <= 40"));
        }
        Ok(LevelRange { lo, hi })
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl Serialize for LevelRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Settings shared by every experiment subcommand. Unset flags fall back to
/// the config file, then to the experiment defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[arg(skip)]
    pub experiment: Option<Experiment>,
    /// Base seed; path i uses stream i [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths (seeds for `project`)
    #[arg(long)]
    pub paths: Option<usize>,
    /// Time horizon T
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Uniform grid cells for sampled drivers and the SPDE solver
    #[arg(long = "grid")]
    #[serde(alias = "grid")]
    pub grid_cells: Option<usize>,
    /// Dyadic levels `a..b` [default: 2..12]
    #[arg(long)]
    pub levels: Option<LevelRange>,
    /// Exponent of the L^p(μ) error [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Projection: left_limit, dyadic (level = top of --levels), dyadic:n or dyadic:n:s [default: left_limit]
    #[arg(long)]
    pub mode: Option<String>,
    /// Anchor s of the dyadic shift [default: 0]
    #[arg(long)]
    pub s: Option<f64>,
    /// Driver for `isometry` and `project`
    #[arg(long, value_enum)]
    pub driver: Option<Driver>,
    /// Poisson intensity [default: 1]
    #[arg(long)]
    pub rate: Option<f64>,
    /// Galerkin modes for `spde` [default: 8]
    #[arg(long)]
    pub modes: Option<usize>,
    /// Covariance eigenvalues for `qwiener` [default: 0.5,0.25,0.125]
    #[arg(long, value_delimiter = ',')]
    pub eigenvalues: Option<Vec<f64>>,
    /// Finite mark-space weights for `prm` [default: 1,2]
    #[arg(long, value_delimiter = ',')]
    pub mark_weights: Option<Vec<f64>>,
    /// z threshold of the Monte Carlo tests [default: 4]
    #[arg(long)]
    pub z: Option<f64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl Settings {
    /// `self` with every field set in `flags` replaced.
    pub fn overlay(mut self, flags: Settings) -> Settings {
        overlay!(
            self, flags, experiment, seed, paths, horizon, grid_cells, levels, p, mode, s, driver, rate, modes,
            eigenvalues, mark_weights, z, out
        );
        self
    }
}

/// Fully resolved and validated experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub paths: usize,
    pub horizon: f64,
    pub grid_cells: usize,
    pub levels: LevelRange,
    pub p: f64,
    pub mode: String,
    pub s: f64,
    /// Only meaningful for `isometry` and `project`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<Driver>,
    pub rate: f64,
    pub modes: usize,
    pub eigenvalues: Vec<f64>,
    pub mark_weights: Vec<f64>,
    pub z: f64,
    #[serde(skip)]
    pub out: PathBuf,
}

pub const DEFAULTS_HELP: &str = "\
Defaults (flags > config file > defaults):
  all experiments   seed=0 paths=10000 horizon=1 rate=1 p=2 levels=2..12 s=0 z=4 mode=left_limit out=out
  isometry          driver=all grid=64
  project           driver=wiener paths=200 grid=65536
  qwiener           eigenvalues=0.5,0.25,0.125 grid=16
  prm               mark-weights=1,2
  spde              modes=8 horizon=0.1 grid=10000

Exit status: 0 success, 1 statistical failure, 2 configuration or runtime error.";

fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

/// Parse a JSON config file. Unknown keys are rejected.
pub fn load_config_file(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<Settings, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        CliError::Config(format!("byte {offset} (line {}, column {}): {e}", e.line(), e.column()))
    })
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

impl ExperimentConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let Some(experiment) = s.experiment else {
            return config_err("no experiment given (set \"experiment\" in the config file or use a subcommand)");
        };
        let (paths, horizon, grid) = match experiment {
            Experiment::PoissonExample | Experiment::Prm => (10_000, 1.0, 1),
            Experiment::Isometry => (10_000, 1.0, 64),
            Experiment::Project => (200, 1.0, 65_536),
            Experiment::Qwiener => (10_000, 1.0, 16),
            Experiment::Spde => (10_000, 0.1, 10_000),
        };
        let driver = match experiment {
            Experiment::Isometry => Some(s.driver.unwrap_or(Driver::All)),
            Experiment::Project => Some(s.driver.unwrap_or(Driver::Wiener)),
            _ => None,
        };
        if driver.is_none() && s.driver.is_some() {
            return config_err(format!("field `driver` does not apply to {experiment}"));
        }
        let cfg = ExperimentConfig {
            experiment,
            seed: s.seed.unwrap_or(0),
            paths: s.paths.unwrap_or(paths),
            horizon: s.horizon.unwrap_or(horizon),
            grid_cells: s.grid_cells.unwrap_or(grid),
            levels: s.levels.unwrap_or(LevelRange { lo: 2, hi: 12 }),
            p: s.p.unwrap_or(2.0),
            mode: s.mode.unwrap_or_else(|| "left_limit".into()),
            s: s.s.unwrap_or(0.0),
            driver,
            rate: s.rate.unwrap_or(1.0),
            modes: s.modes.unwrap_or(8),
            eigenvalues: s.eigenvalues.unwrap_or_else(|| vec![0.5, 0.25, 0.125]),
            mark_weights: s.mark_weights.unwrap_or_else(|| vec![1.0, 2.0]),
            z: s.z.unwrap_or(4.0),
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                config_err(format!("field `{name}` must be positive and finite, got {v}"))
            }
        };
        if self.paths < 2 {
            return config_err(format!("field `paths` must be at least 2, got {}", self.paths));
        }
        if self.grid_cells == 0 {
            return config_err("field `grid_cells` must be positive");
        }
        if self.modes == 0 {
            return config_err("field `modes` must be positive");
        }
        positive("horizon", self.horizon)?;
        positive("rate", self.rate)?;
        positive("z", self.z)?;
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return config_err(format!("field `p` must be >= 1, got {}", self.p));
        }
        if !(self.s >= 0.0 && self.s <= self.horizon) {
            return config_err(format!("field `s` must lie in [0, horizon], got {}", self.s));
        }
        for (name, v) in [("eigenvalues", &self.eigenvalues), ("mark_weights", &self.mark_weights)] {
            if v.is_empty() {
                return config_err(format!("field `{name}` must not be empty"));
            }
            for x in v {
                positive(name, *x)?;
            }
        }
        self.projection()?;
        if self.experiment == Experiment::Project && !matches!(self.driver, Some(Driver::Wiener | Driver::Poisson)) {
            return config_err("field `driver` must be wiener or poisson for project");
        }
        Ok(())
    }

    pub fn projection(&self) -> Result<ProjectionMode, CliError> {
        if self.mode == "dyadic" {
            let p = DyadicApproxParams::new(self.levels.hi, self.s).map_err(|e| CliError::Config(e.to_string()))?;
            return Ok(ProjectionMode::Dyadic(p));
        }
        self.mode.parse().map_err(|e: itoext::Error| CliError::Config(format!("field `mode`: {e}")))
    }
}
