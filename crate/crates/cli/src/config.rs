use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use serde::Deserialize;

/// `t_min:t_max:points`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        dynmap::divisibility::linspace(self.t_min, self.t_max, self.points)
    }

    /// 21 points on the middle 90% of a domain.
    pub fn default_for(domain: (f64, f64)) -> Self {
        let pad = 0.05 * (domain.1 - domain.0);
        Self { t_min: domain.0 + pad, t_max: domain.1 - pad, points: 21 }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected t_min:t_max:points, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let points = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
        Ok(Self { t_min: num(a)?, t_max: num(b)?, points })
    }
}

/// A bad setting, named by the flag or config field it came from.
#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &'static str, message: impl Into<String>) -> anyhow::Error {
    ConfigError { field, message: message.into() }.into()
}

/// Flags shared by every subcommand; each command reads the ones it needs.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// Named family; see `--list-presets`.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file with any of the fields below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Truncation size or block count.
    #[arg(long)]
    pub n: Option<usize>,
    /// Block size for the idempotent families.
    #[arg(long)]
    pub k: Option<usize>,
    /// Time grid as t_min:t_max:points.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Central-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Slope above which a derivative counts as an increase.
    #[arg(long = "tau-slope")]
    pub tau_slope: Option<f64>,
    /// Directory for report.json and sweep.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random samples for contractivity checks.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Earlier time for the intermediate map.
    #[arg(long)]
    pub s: Option<f64>,
    /// Later time for the intermediate map.
    #[arg(long)]
    pub t: Option<f64>,
    /// Relative singular-value cutoff for inverses and kernels.
    #[arg(long)]
    pub rcond: Option<f64>,
    /// Witness set: structured, library or all.
    #[arg(long)]
    pub witnesses: Option<WitnessSet>,
    /// Gaussian channel file {m, X, Y} to validate instead of a preset.
    #[arg(long)]
    pub channel: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WitnessSet {
    /// The preset's own witnesses, or the library if it has none.
    Structured,
    /// Matrix-unit differences, projector differences and random Hermitians.
    Library,
    All,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    n: Option<usize>,
    k: Option<usize>,
    grid: Option<GridSpec>,
    h: Option<f64>,
    tau_slope: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    samples: Option<usize>,
    s: Option<f64>,
    t: Option<f64>,
    rcond: Option<f64>,
    witnesses: Option<WitnessSet>,
    channel: Option<PathBuf>,
}

/// Settings after merging the config file under the flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub grid: Option<GridSpec>,
    pub h: Option<f64>,
    pub tau_slope: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub rcond: f64,
    pub witnesses: WitnessSet,
    pub channel: Option<PathBuf>,
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let cfg = Self {
            preset: args.preset.clone().or(file.preset),
            n: args.n.or(file.n),
            k: args.k.or(file.k),
            grid: args.grid.or(file.grid),
            h: args.h.or(file.h),
            tau_slope: args.tau_slope.or(file.tau_slope).unwrap_or(dynmap::divisibility::TAU_SLOPE),
            out: args.out.clone().or(file.out),
            seed: args.seed.or(file.seed).unwrap_or(0),
            samples: args.samples.or(file.samples).unwrap_or(200),
            s: args.s.or(file.s),
            t: args.t.or(file.t),
            rcond: args.rcond.or(file.rcond).unwrap_or(dynmap::channel::DEFAULT_RCOND),
            witnesses: args.witnesses.or(file.witnesses).unwrap_or(WitnessSet::Structured),
            channel: args.channel.clone().or(file.channel),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(g) = &self.grid {
            if g.points < 2 {
                return Err(bad("grid", format!("need at least 2 points, got {}", g.points)));
            }
            if !(g.t_min < g.t_max) {
                return Err(bad("grid", format!("t_min {} must be below t_max {}", g.t_min, g.t_max)));
            }
        }
        if let Some(h) = self.h {
            if !(h > 0.0) {
                return Err(bad("h", format!("must be positive, got {h}")));
            }
        }
        if !(self.tau_slope > 0.0) {
            return Err(bad("tau_slope", format!("must be positive, got {}", self.tau_slope)));
        }
        if !(self.rcond > 0.0) {
            return Err(bad("rcond", format!("must be positive, got {}", self.rcond)));
        }
        if self.samples == 0 {
            return Err(bad("samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn require_preset(&self) -> Result<&str> {
        self.preset.as_deref().ok_or_else(|| bad("preset", "missing; pass --preset or set it in --config"))
    }

    pub fn grid_or(&self, domain: (f64, f64)) -> Vec<f64> {
        self.grid.unwrap_or_else(|| GridSpec::default_for(domain)).points()
    }

    pub fn times(&self) -> Result<(f64, f64)> {
        let s = self.s.ok_or_else(|| bad("s", "missing"))?;
        let t = self.t.ok_or_else(|| bad("t", "missing"))?;
        if s > t {
            return Err(bad("s", format!("must not exceed t ({s} > {t})")));
        }
        Ok((s, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses_and_rejects() {
        let g: GridSpec = "0.05:0.45:41".parse().unwrap();
        assert_eq!(g, GridSpec { t_min: 0.05, t_max: 0.45, points: 41 });
        assert!("0.1:0.2".parse::<GridSpec>().is_err());
        assert!("a:0.2:3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let args = RunArgs { grid: Some(GridSpec { t_min: 1.0, t_max: 0.0, points: 5 }), ..Default::default() };
        let err = RunConfig::resolve(&args).unwrap_err();
        assert_eq!(err.downcast_ref::<ConfigError>().unwrap().field, "grid");
        let args = RunArgs { h: Some(-1.0), ..Default::default() };
        assert!(RunConfig::resolve(&args).unwrap_err().to_string().contains("`h`"));
    }
}
