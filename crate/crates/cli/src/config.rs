//! Experiment configuration files (TOML) and their validation.

use std::path::{Path, PathBuf};

use coordwalk::geometry::{make_lower_bound_body, Body};
use coordwalk::samplers::{Walk, WalkKind};
use serde::{Deserialize, Serialize};

use crate::bench::random_polytope;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sample,
    Conductance,
    Iso,
    Lowerbound,
    Mixcurve,
    Bench,
    Discrete,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Conductance => "conductance",
            Command::Iso => "iso",
            Command::Lowerbound => "lowerbound",
            Command::Mixcurve => "mixcurve",
            Command::Bench => "bench",
            Command::Discrete => "discrete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    /// Binary trajectory dump; `sample` only.
    Bin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Cube { n: usize },
    Cuboid { lo: Vec<f64>, hi: Vec<f64> },
    Ball {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Simplex { n: usize },
    Prism { n: usize, length: f64 },
    /// Unit-normal rows around the unit ball; see [`random_polytope`].
    RandomPolytope {
        n: usize,
        m: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for BodySpec {
    fn default() -> Self {
        BodySpec::Cube { n: 3 }
    }
}

impl BodySpec {
    pub fn build(&self) -> coordwalk::Result<Body> {
        match self {
            BodySpec::Cube { n } => Body::unit_cube(*n),
            BodySpec::Cuboid { lo, hi } => Body::cuboid(lo.clone(), hi.clone()),
            BodySpec::Ball { n, radius } => Body::ball(vec![0.0; *n], *radius),
            BodySpec::Simplex { n } => Body::standard_simplex(*n),
            BodySpec::Prism { n, length } => make_lower_bound_body(*n, *length),
            BodySpec::RandomPolytope { n, m, seed } => random_polytope(*n, *m, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkName {
    Char,
    Har,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpec {
    #[serde(default = "default_walk")]
    pub kind: WalkName,
    #[serde(default)]
    pub lazy: bool,
    /// Step radius of the ball walk.
    pub delta: Option<f64>,
}

fn default_walk() -> WalkName {
    WalkName::Char
}

impl Default for WalkSpec {
    fn default() -> Self {
        Self {
            kind: WalkName::Char,
            lazy: false,
            delta: None,
        }
    }
}

impl WalkSpec {
    pub fn build(&self) -> Result<Walk, CliError> {
        let kind = match (self.kind, self.delta) {
            (WalkName::Char, None) => WalkKind::Char,
            (WalkName::Har, None) => WalkKind::HitAndRun,
            (WalkName::Ball, Some(delta)) => WalkKind::BallWalk { delta },
            (WalkName::Ball, None) => return Err(CliError::config("walk.delta", "the ball walk needs a step radius")),
            (_, Some(_)) => return Err(CliError::config("walk.delta", "only the ball walk takes a step radius")),
        };
        Walk::new(kind, self.lazy).map_err(|e| CliError::config("walk", e.to_string()))
    }
}

/// Where chains start.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    #[default]
    Center,
    Uniform,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleParams {
    pub steps: u64,
    pub thin: u64,
    pub start: Start,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            steps: 10_000,
            thin: 1,
            start: Start::Center,
        }
    }
}

/// Halfspace `{normal · x ≤ offset}`; `normal` defaults to the unit vector
/// of `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConductanceParams {
    pub samples: u64,
    pub axis: usize,
    pub normal: Option<Vec<f64>>,
    /// Defaults to the midpoint of the bounding box along `axis`.
    pub offset: Option<f64>,
}

impl Default for ConductanceParams {
    fn default() -> Self {
        Self {
            samples: 100_000,
            axis: 0,
            normal: None,
            offset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsoParams {
    /// Cells per side.
    pub k: usize,
    pub n: usize,
    /// Restarts of the randomized search (ignored by the exhaustive one).
    pub budget: u64,
}

impl Default for IsoParams {
    fn default() -> Self {
        Self { k: 4, n: 2, budget: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowerBoundParams {
    pub ns: Vec<usize>,
    pub lengths: Vec<f64>,
    pub samples: u64,
}

impl Default for LowerBoundParams {
    fn default() -> Self {
        Self {
            ns: vec![3],
            lengths: vec![8.0, 16.0, 32.0, 64.0],
            samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixCurveParams {
    /// Checkpoints; defaults to `0..=t_max`.
    pub checkpoints: Option<Vec<u64>>,
    pub t_max: u64,
    pub replicas: u64,
    /// Bins per axis over the bounding box.
    pub bins: usize,
    pub start: Start,
}

impl Default for MixCurveParams {
    fn default() -> Self {
        Self {
            checkpoints: None,
            t_max: 50,
            replicas: 2000,
            bins: 2,
            start: Start::Center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchParams {
    pub n: usize,
    pub m: usize,
    pub steps: u64,
    pub repeats: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            n: 200,
            m: 400,
            steps: 100_000,
            repeats: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscreteParams {
    /// Cells along the longest side of the bounding box.
    pub k: usize,
}

impl Default for DiscreteParams {
    fn default() -> Self {
        Self { k: 16 }
    }
}

/// Contents of a configuration file. Every section is optional; only the
/// one matching `command` is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub body: BodySpec,
    #[serde(default)]
    pub walk: WalkSpec,
    #[serde(default)]
    pub sample: SampleParams,
    #[serde(default)]
    pub conductance: ConductanceParams,
    #[serde(default)]
    pub iso: IsoParams,
    #[serde(default)]
    pub lowerbound: LowerBoundParams,
    #[serde(default)]
    pub mixcurve: MixCurveParams,
    #[serde(default)]
    pub bench: BenchParams,
    #[serde(default)]
    pub discrete: DiscreteParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            CliError::Config {
                field: String::new(),
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// A configuration with flags applied and every field checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub body: BodySpec,
    pub walk: WalkSpec,
    pub params: serde_json::Value,
    #[serde(skip)]
    pub config: ExperimentConfig,
}

impl Resolved {
    /// Merges flag overrides into `config`; flags win.
    pub fn new(
        command: Command,
        mut config: ExperimentConfig,
        seed: Option<u64>,
        format: Option<Format>,
        out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        if let Some(c) = config.command {
            if c != command {
                return Err(CliError::config(
                    "command",
                    format!("config is for `{}` but `{}` was requested", c.name(), command.name()),
                ));
            }
        }
        config.command = Some(command);
        let seed = seed
            .or(config.seed)
            .ok_or_else(|| CliError::config("seed", "a seed is required (config `seed` or --seed)"))?;
        config.seed = Some(seed);
        let format = format.or(config.format).unwrap_or(Format::Csv);
        config.format = Some(format);
        let out = out.or_else(|| config.out.clone());
        if format == Format::Bin && command != Command::Sample {
            return Err(CliError::config("format", "binary output is only available for `sample`"));
        }
        let params = match command {
            Command::Sample => json(&config.sample),
            Command::Conductance => json(&config.conductance),
            Command::Iso => json(&config.iso),
            Command::Lowerbound => json(&config.lowerbound),
            Command::Mixcurve => json(&config.mixcurve),
            Command::Bench => json(&config.bench),
            Command::Discrete => json(&config.discrete),
        };
        let resolved = Self {
            command,
            seed,
            format,
            out,
            body: config.body.clone(),
            walk: config.walk.clone(),
            params,
            config,
        };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let uses_body = matches!(
            self.command,
            Command::Sample | Command::Conductance | Command::Mixcurve | Command::Discrete
        );
        if uses_body {
            self.body.build().map_err(|e| CliError::config("body", e.to_string()))?;
        }
        if matches!(self.command, Command::Sample | Command::Conductance | Command::Mixcurve) {
            self.walk.build()?;
        }
        match self.command {
            Command::Sample => {
                ensure(c.sample.thin >= 1, "sample.thin", "must be at least 1")?;
            }
            Command::Conductance => {
                ensure(c.conductance.samples >= 1000, "conductance.samples", "must be at least 1000")?;
                if c.conductance.normal.is_none() {
                    let n = self.body.build().map(|b| b.dim()).unwrap_or(0);
                    ensure(c.conductance.axis < n, "conductance.axis", "out of range for the body")?;
                }
            }
            Command::Iso => {
                ensure(c.iso.n >= 2, "iso.n", "must be at least 2")?;
                ensure(c.iso.k >= 2, "iso.k", "must be at least 2")?;
                ensure(c.iso.budget >= 1, "iso.budget", "must be at least 1")?;
            }
            Command::Lowerbound => {
                let p = &c.lowerbound;
                ensure(!p.ns.is_empty() && !p.lengths.is_empty(), "lowerbound", "needs ns and lengths")?;
                ensure(p.ns.iter().all(|n| (2..=8).contains(n)), "lowerbound.ns", "entries must lie in [2, 8]")?;
                let max_n = *p.ns.iter().max().unwrap_or(&2) as f64;
                ensure(
                    p.lengths.iter().all(|&d| d >= 2.0 * max_n),
                    "lowerbound.lengths",
                    "every length must be at least 2n",
                )?;
                ensure(p.samples >= 1000, "lowerbound.samples", "must be at least 1000")?;
            }
            Command::Mixcurve => {
                let p = &c.mixcurve;
                ensure(p.replicas >= 1000, "mixcurve.replicas", "must be at least 1000")?;
                ensure(p.bins >= 1, "mixcurve.bins", "must be at least 1")?;
                if let Some(ts) = &p.checkpoints {
                    ensure(
                        !ts.is_empty() && ts.windows(2).all(|w| w[0] < w[1]),
                        "mixcurve.checkpoints",
                        "must be nonempty and strictly increasing",
                    )?;
                }
            }
            Command::Bench => {
                let p = &c.bench;
                ensure(p.n >= 1, "bench.n", "must be at least 1")?;
                ensure(p.m > p.n, "bench.m", "needs more rows than dimensions")?;
                ensure(p.repeats >= 1, "bench.repeats", "must be at least 1")?;
                ensure(p.steps >= 1, "bench.steps", "must be at least 1")?;
            }
            Command::Discrete => {
                ensure(c.discrete.k >= 1, "discrete.k", "must be at least 1")?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("parameters serialize")
}

fn ensure(ok: bool, field: &str, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(field, message))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::from_toml(
            r#"
command = "mixcurve"
seed = 7
[body]
kind = "prism"
n = 3
length = 32.0
[walk]
kind = "char"
lazy = true
[mixcurve]
t_max = 10
replicas = 1000
start = { point = [1.0, 1.0, 0.1] }
"#,
        )
        .unwrap();
        assert_eq!(cfg.body, BodySpec::Prism { n: 3, length: 32.0 });
        assert_eq!(cfg.mixcurve.start, Start::Point(vec![1.0, 1.0, 0.1]));
        let r = Resolved::new(Command::Mixcurve, cfg, None, None, None).unwrap();
        assert_eq!(r.seed, 7);
        assert!(r.walk.build().unwrap().lazy);
    }

    #[test]
    fn reports_line_of_bad_field() {
        let err = ExperimentConfig::from_toml("seed = 1\n[body]\nkind = \"cube\"\nn = 3\nsize = 2\n").unwrap_err();
        match err {
            CliError::Config { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("size"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_and_seed_is_required() {
        let cfg = ExperimentConfig {
            seed: Some(1),
            ..Default::default()
        };
        let r = Resolved::new(Command::Sample, cfg.clone(), Some(9), Some(Format::Json), None).unwrap();
        assert_eq!((r.seed, r.format), (9, Format::Json));
        assert!(Resolved::new(Command::Sample, ExperimentConfig::default(), None, None, None).is_err());
        assert!(Resolved::new(Command::Iso, cfg.clone(), None, Some(Format::Bin), None).is_err());
        let mismatched = ExperimentConfig {
            command: Some(Command::Bench),
            ..cfg
        };
        assert!(Resolved::new(Command::Sample, mismatched, None, None, None).is_err());
    }

    #[test]
    fn hash_ignores_output_path() {
        let cfg = ExperimentConfig {
            seed: Some(1),
            ..Default::default()
        };
        let a = Resolved::new(Command::Sample, cfg.clone(), None, None, Some("a.csv".into())).unwrap();
        let b = Resolved::new(Command::Sample, cfg.clone(), None, None, Some("b.csv".into())).unwrap();
        let c = Resolved::new(Command::Sample, cfg, Some(2), None, None).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut cfg = ExperimentConfig {
            seed: Some(1),
            ..Default::default()
        };
        cfg.lowerbound.lengths = vec![4.0];
        assert!(Resolved::new(Command::Lowerbound, cfg.clone(), None, None, None).is_err());
        cfg.walk.kind = WalkName::Ball;
        assert!(Resolved::new(Command::Sample, cfg, None, None, None).is_err());
    }
}
