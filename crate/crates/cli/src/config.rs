//! Run configuration: defaults, an optional `key = value` file, and flags, in
//! increasing order of precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use tfv_core::space::MAX_DIM;
use tfv_core::Differentiation;

use crate::CliError;

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_N: usize = 3;
pub const DEFAULT_T_MAX: f64 = 0.5;
pub const DEFAULT_STEP: f64 = 1e-3;

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Model space: euclidean, uhs, sphere, sphere-north, sphere-south, hyperboloid, twisted, product, twisted-q
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Catalog field id (scalar field name for `flow`)
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Chart dimension
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides every check tolerance of the run
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Theorem check: curvature-identity, torqued-obstruction, anti-obstruction
    #[arg(long, global = true)]
    pub check: Option<String>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Comma-separated chart coordinates of the flow start point
    #[arg(long, global = true)]
    pub start: Option<String>,
    /// Differentiation backend: exact, central, central4
    #[arg(long, global = true)]
    pub diff: Option<String>,
    /// Flow trace CSV path (defaults to the report path with a .csv extension)
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// File of `key = value` lines supplying defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffMode {
    Exact,
    Central,
    Central4,
}

impl DiffMode {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(DiffMode::Exact),
            "central" | "fd" => Ok(DiffMode::Central),
            "central4" => Ok(DiffMode::Central4),
            _ => Err(CliError::Config(format!("unknown differentiation backend `{s}`"))),
        }
    }

    pub fn mode(self) -> Differentiation {
        match self {
            DiffMode::Exact => Differentiation::Exact,
            DiffMode::Central => Differentiation::central(),
            DiffMode::Central4 => Differentiation::central_fourth_order(),
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub space: Option<String>,
    pub field: Option<String>,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Explicit tolerance override; `None` keeps each check's default.
    pub tol: Option<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub check: Option<String>,
    pub t_max: f64,
    pub step: f64,
    pub start: Option<Vec<f64>>,
    pub diff: DiffMode,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            space: None,
            field: None,
            n: DEFAULT_N,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tol: None,
            out: None,
            check: None,
            t_max: DEFAULT_T_MAX,
            step: DEFAULT_STEP,
            start: None,
            diff: DiffMode::Exact,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Tolerance for a check whose own default is `default`.
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn mode(&self) -> Differentiation {
        self.diff.mode()
    }

    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => parse_file(path)?,
            None => BTreeMap::new(),
        };
        let mut cfg = RunConfig::default();
        for (key, value) in &file {
            cfg.set(key, value)?;
        }
        let mut set_flag = |key: &str, value: Option<String>| -> Result<(), CliError> {
            match value {
                Some(v) => cfg.set(key, &v),
                None => Ok(()),
            }
        };
        set_flag("space", flags.space.clone())?;
        set_flag("field", flags.field.clone())?;
        set_flag("n", flags.n.map(|v| v.to_string()))?;
        set_flag("samples", flags.samples.map(|v| v.to_string()))?;
        set_flag("seed", flags.seed.map(|v| v.to_string()))?;
        set_flag("tol", flags.tol.map(|v| format!("{v:e}")))?;
        set_flag("out", flags.out.as_ref().map(|p| p.display().to_string()))?;
        set_flag("check", flags.check.clone())?;
        set_flag("t_max", flags.t_max.map(|v| format!("{v:e}")))?;
        set_flag("step", flags.step.map(|v| format!("{v:e}")))?;
        set_flag("start", flags.start.clone())?;
        set_flag("diff", flags.diff.clone())?;
        set_flag("csv", flags.csv.as_ref().map(|p| p.display().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("invalid value `{value}` for {what}"));
        match key.replace('-', "_").as_str() {
            "space" => self.space = Some(value.to_string()),
            "field" => self.field = Some(value.to_string()),
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "tol" => self.tol = Some(value.parse().map_err(|_| bad("tol"))?),
            "out" => self.out = Some(PathBuf::from(value)),
            "check" => self.check = Some(value.to_string()),
            "t_max" => self.t_max = value.parse().map_err(|_| bad("t-max"))?,
            "step" => self.step = value.parse().map_err(|_| bad("step"))?,
            "start" => {
                let coords: Result<Vec<f64>, _> = value.split(',').map(|c| c.trim().parse::<f64>()).collect();
                self.start = Some(coords.map_err(|_| bad("start"))?);
            }
            "diff" => self.diff = DiffMode::parse(value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            other => return Err(CliError::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(2..=MAX_DIM).contains(&self.n) {
            return Err(CliError::Config(format!("n must lie in 2..={MAX_DIM}, got {}", self.n)));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Config(format!("t-max must be positive, got {}", self.t_max)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Config(format!("step must be positive, got {}", self.step)));
        }
        if let Some(start) = &self.start {
            if start.iter().any(|c| !c.is_finite()) {
                return Err(CliError::Config("start coordinates must be finite".into()));
            }
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", lineno + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(&Flags::default()).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.tol_or(1e-7), 1e-7);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\nseed = 9\nsamples=17\nt-max = 0.25\n").unwrap();
        let flags = Flags { config: Some(path), seed: Some(3), ..Default::default() };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.samples, 17);
        assert_eq!(cfg.t_max, 0.25);
        assert_eq!(cfg.n, DEFAULT_N);
    }

    #[test]
    fn rejects_bad_values() {
        for flags in [
            Flags { n: Some(1), ..Default::default() },
            Flags { n: Some(9), ..Default::default() },
            Flags { samples: Some(0), ..Default::default() },
            Flags { tol: Some(-1.0), ..Default::default() },
            Flags { start: Some("1,x".into()), ..Default::default() },
            Flags { diff: Some("magic".into()), ..Default::default() },
        ] {
            assert!(matches!(RunConfig::resolve(&flags), Err(CliError::Config(_))));
        }
        assert!(parse_config("novalue").is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.set("colour", "red").is_err());
    }
}
