//! Flat `key = value` experiment configuration. Values from the command line
//! override values read from a config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use warped_limit_core::curvature::dimension_threshold;
use warped_limit_core::WarpParams;

/// Bad configuration or command line; maps to exit status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    CurvatureScan,
    Growth,
    LemmaBounds,
    FarLoop,
    OrbitDimension,
    Halfline,
    Flatness,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::CurvatureScan,
        Experiment::Growth,
        Experiment::LemmaBounds,
        Experiment::FarLoop,
        Experiment::OrbitDimension,
        Experiment::Halfline,
        Experiment::Flatness,
        Experiment::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CurvatureScan => "curvature-scan",
            Experiment::Growth => "growth",
            Experiment::LemmaBounds => "lemma-bounds",
            Experiment::FarLoop => "far-loop",
            Experiment::OrbitDimension => "orbit-dimension",
            Experiment::Halfline => "halfline",
            Experiment::Flatness => "flatness",
            Experiment::OracleCheck => "oracle-check",
        }
    }

    /// Experiment-specific keys accepted in config files and as flags.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::CurvatureScan => &["r-min", "r-max", "n-grid"],
            Experiment::Growth => &["l-min", "l-max", "n-l", "fit-min", "fit-max", "tolerance"],
            Experiment::LemmaBounds => &["l-list"],
            Experiment::FarLoop => &["s-list", "eps-list"],
            Experiment::OrbitDimension => &[
                "l-ref",
                "n-samples",
                "b-min",
                "b-max",
                "n-deltas",
                "tolerance",
                "holder-l-ref",
                "holder-samples",
                "holder-b-min",
                "stability-tol",
            ],
            Experiment::Halfline => &["s-list", "fractions", "angle-gaps", "tolerance"],
            Experiment::Flatness => &["s", "rho-list", "n-points"],
            Experiment::OracleCheck => &["l-list", "mesh", "stencil", "tolerance"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| UsageError(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PChoice {
    /// Least `p` satisfying the dimension threshold.
    Auto,
    Fixed(u32),
}

impl FromStr for PChoice {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(PChoice::Auto);
        }
        s.parse().map(PChoice::Fixed).map_err(|_| UsageError(format!("p must be 'auto' or an integer, got '{s}'")))
    }
}

const COMMON_KEYS: [&str; 6] = ["experiment", "alpha", "p", "jobs", "out-dir", "seed"];

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    pub p: PChoice,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Merges the config file (if any) with command-line `overrides`. The
    /// experiment comes from `experiment` or else from the file.
    pub fn resolve(
        experiment: Option<Experiment>,
        config_file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> anyhow::Result<Self> {
        let mut values = match config_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            values.insert(k.clone(), v.clone());
        }
        let experiment = match (experiment, values.remove("experiment")) {
            (Some(e), Some(named)) if named != e.name() => {
                return Err(usage(format!("config names experiment '{named}' but '{e}' was requested")))
            }
            (Some(e), _) => e,
            (None, Some(named)) => named.parse()?,
            (None, None) => return Err(usage("no experiment given (subcommand or 'experiment' key)")),
        };
        for key in values.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !experiment.keys().contains(&key.as_str()) {
                return Err(usage(format!("unknown key '{key}' for experiment {experiment}")));
            }
        }
        let alpha: f64 = match values.get("alpha") {
            Some(v) => v.parse().map_err(|_| usage(format!("alpha must be a number, got '{v}'")))?,
            None => return Err(usage("alpha is required")),
        };
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(usage(format!("alpha must be positive, got {alpha}")));
        }
        let p = values.get("p").map(|v| v.parse()).transpose()?.unwrap_or(PChoice::Auto);
        let mut cfg = Self {
            experiment,
            alpha,
            p,
            jobs: 0,
            out_dir: PathBuf::from(values.get("out-dir").map(String::as_str).unwrap_or("out")),
            seed: DEFAULT_SEED,
            values,
        };
        cfg.jobs = cfg.usize("jobs", 0)?;
        cfg.seed = cfg.u64("seed", DEFAULT_SEED)?;
        Ok(cfg)
    }

    /// `p` with "auto" resolved through the dimension threshold.
    pub fn resolved_p(&self) -> u32 {
        match self.p {
            PChoice::Auto => dimension_threshold(self.alpha),
            PChoice::Fixed(p) => p,
        }
    }

    pub fn params(&self) -> anyhow::Result<WarpParams> {
        Ok(WarpParams::new(self.alpha, self.resolved_p())?)
    }

    fn parse<T: FromStr>(&self, key: &str, default: T) -> anyhow::Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| usage(format!("invalid value '{v}' for {key}"))),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> anyhow::Result<f64> {
        self.parse(key, default)
    }

    pub fn usize(&self, key: &str, default: usize) -> anyhow::Result<usize> {
        self.parse(key, default)
    }

    /// Integer that may be written in float notation such as `1e6`.
    pub fn u64(&self, key: &str, default: u64) -> anyhow::Result<u64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => parse_count(v).ok_or_else(|| usage(format!("invalid integer '{v}' for {key}"))),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> anyhow::Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| usage(format!("invalid number '{x}' in {key}"))))
                .collect(),
        }
    }

    pub fn u64_list(&self, key: &str, default: &[u64]) -> anyhow::Result<Vec<u64>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| parse_count(x.trim()).ok_or_else(|| usage(format!("invalid integer '{x}' in {key}"))))
                .collect(),
        }
    }
}

fn parse_count(s: &str) -> Option<u64> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(n);
    }
    let x: f64 = s.parse().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64).then_some(x as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_flat_file_with_comments() {
        let map = parse_config_text("# comment\nalpha = 0.5\nl_min=100 # trailing\n\n").unwrap();
        assert_eq!(map.get("alpha").unwrap(), "0.5");
        assert_eq!(map.get("l-min").unwrap(), "100");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config_text("alpha 0.5").is_err());
        assert!(parse_config_text("alpha = 1\nalpha = 2").is_err());
    }

    #[test]
    fn command_line_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("growth.cfg");
        std::fs::write(&path, "experiment = growth\nalpha = 1\nl-min = 100\n").unwrap();
        let cfg = ExperimentConfig::resolve(None, Some(&path), &kv(&[("l-min", "1e3")])).unwrap();
        assert_eq!(cfg.experiment, Experiment::Growth);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.u64("l-min", 0).unwrap(), 1000);
        assert_eq!(cfg.resolved_p(), 25);
    }

    #[test]
    fn unknown_keys_and_missing_alpha_are_usage_errors() {
        let err = ExperimentConfig::resolve(Some(Experiment::Growth), None, &kv(&[("alpha", "1"), ("rho", "2")]))
            .unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        let err = ExperimentConfig::resolve(Some(Experiment::Growth), None, &[]).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn p_auto_and_fixed() {
        let auto = ExperimentConfig::resolve(Some(Experiment::CurvatureScan), None, &kv(&[("alpha", "0.5")])).unwrap();
        assert_eq!(auto.resolved_p(), 9);
        let fixed =
            ExperimentConfig::resolve(Some(Experiment::CurvatureScan), None, &kv(&[("alpha", "1"), ("p", "5")]))
                .unwrap();
        assert_eq!(fixed.resolved_p(), 5);
        assert!("five".parse::<PChoice>().is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("warp-drive".parse::<Experiment>().is_err());
    }
}
