//! Run configuration: command-line flags merged over an optional JSON file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qaco::hybrid::Refinement;
use qaco::{gen_random_instance, parse_instance, AcoParams, Instance, MetricMode, NoiseKind, NoiseSpec, QacoParams};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Noise levels swept by default: 0.1%, 1%, 2%, 5% and 10%.
pub const DEFAULT_LEVELS: [f64; 5] = [0.001, 0.01, 0.02, 0.05, 0.10];
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "aco")]
    Aco,
    #[serde(rename = "qaco-hybrid")]
    QacoHybrid,
    #[serde(rename = "clustered-aco")]
    ClusteredAco,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Aco, SolverKind::QacoHybrid, SolverKind::ClusteredAco];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Aco => "aco",
            SolverKind::QacoHybrid => "qaco-hybrid",
            SolverKind::ClusteredAco => "clustered-aco",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "aco" => Ok(SolverKind::Aco),
            "qaco" | "qacohybrid" => Ok(SolverKind::QacoHybrid),
            "clusteredaco" => Ok(SolverKind::ClusteredAco),
            _ => Err(BenchError::Config(format!("unknown solver `{s}` (expected aco, qaco-hybrid or clustered-aco)"))),
        }
    }
}

pub fn parse_metric(s: &str) -> Result<MetricMode, BenchError> {
    match s.to_ascii_lowercase().as_str() {
        "canonical" | "tsplib" => Ok(MetricMode::TsplibCanonical),
        "paper" | "euclidean" | "plain" => Ok(MetricMode::PlainEuclidean),
        _ => Err(BenchError::Config(format!("unknown metric `{s}` (expected canonical or paper)"))),
    }
}

pub fn metric_name(m: MetricMode) -> &'static str {
    match m {
        MetricMode::TsplibCanonical => "canonical",
        MetricMode::PlainEuclidean => "paper",
    }
}

pub fn parse_noise_kind(s: &str) -> Result<NoiseKind, BenchError> {
    s.parse().map_err(BenchError::Config)
}

/// `"0..5"`, `"1,4,9"` or a single seed.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, BenchError> {
    let bad = || BenchError::Config(format!("bad seed list `{s}`"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

pub fn parse_levels(s: &str) -> Result<Vec<f64>, BenchError> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| BenchError::Config(format!("bad noise level `{t}`")))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(BenchError::Config(format!("noise level {v} outside [0, 1]")))
            }
        })
        .collect()
}

/// Where a run's cities come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    /// Uniform points in `[0, bound]²`, written `random:N[:SEED[:BOUND]]`.
    Random { n: usize, seed: u64, bound: f64 },
}

impl InstanceSource {
    pub fn load(&self) -> Result<Instance, BenchError> {
        match self {
            InstanceSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
                parse_instance(&text).map_err(|e| BenchError::Instance(format!("{}: {e}", p.display())))
            }
            InstanceSource::Random { n, seed, bound } => {
                gen_random_instance(*n, *seed, *bound).map_err(|e| BenchError::Instance(e.to_string()))
            }
        }
    }
}

impl FromStr for InstanceSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some(spec) = s.strip_prefix("random:") else {
            return Ok(InstanceSource::File(PathBuf::from(s)));
        };
        let bad = || BenchError::Config(format!("bad random spec `{s}` (expected random:N[:SEED[:BOUND]])"));
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.is_empty() || parts.len() > 3 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let seed = parts.get(1).map_or(Ok(42), |t| t.parse()).map_err(|_| bad())?;
        let bound = parts.get(2).map_or(Ok(1000.0), |t| t.parse()).map_err(|_| bad())?;
        Ok(InstanceSource::Random { n, seed, bound })
    }
}

impl fmt::Display for InstanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSource::File(p) => write!(f, "{}", p.display()),
            InstanceSource::Random { n, seed, bound } => write!(f, "random:{n}:{seed}:{bound}"),
        }
    }
}

/// Everything a run needs after flags and config file are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub instances: Vec<InstanceSource>,
    pub solvers: Vec<SolverKind>,
    pub metric: MetricMode,
    pub noise: NoiseSpec,
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    /// Write 0 in the wall_ms column so repeated runs compare byte for byte.
    pub omit_timing: bool,
    pub aco: AcoParams,
    pub qaco: QacoParams,
    pub refinement: Refinement,
    pub two_opt_passes: usize,
    pub polish_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            solvers: vec![SolverKind::QacoHybrid],
            metric: MetricMode::TsplibCanonical,
            noise: NoiseSpec::none(),
            levels: DEFAULT_LEVELS.to_vec(),
            seeds: DEFAULT_SEEDS.to_vec(),
            out: PathBuf::from("results"),
            omit_timing: false,
            aco: AcoParams::default(),
            qaco: QacoParams::default(),
            refinement: Refinement::TwoOpt,
            two_opt_passes: 20,
            polish_iterations: 200,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.instances.is_empty() {
            return Err(BenchError::Config("no instance given".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::Config("no solver given".into()));
        }
        if self.noise.effective_rate() > 0.0 && self.solvers.iter().any(|s| *s != SolverKind::QacoHybrid) {
            return Err(BenchError::Config("noise only applies to the qaco-hybrid solver".into()));
        }
        self.aco.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        self.qaco.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}

/// JSON mirror of the command-line flags. Every field is optional; list
/// fields accept either one string or an array.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub instance: Option<OneOrMany>,
    pub solver: Option<OneOrMany>,
    pub metric: Option<String>,
    pub noise: Option<String>,
    pub rate: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub seeds: Option<SeedList>,
    pub out: Option<PathBuf>,
    pub omit_timing: Option<bool>,
    pub aco: Option<AcoParams>,
    pub qaco: Option<QacoParams>,
    pub refinement: Option<Refinement>,
    pub two_opt_passes: Option<usize>,
    pub polish_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedList {
    Spec(String),
    List(Vec<u64>),
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    /// Lay `other` over `self`; fields set in `other` win.
    pub fn overlay(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            instance: other.instance.or(self.instance),
            solver: other.solver.or(self.solver),
            metric: other.metric.or(self.metric),
            noise: other.noise.or(self.noise),
            rate: other.rate.or(self.rate),
            levels: other.levels.or(self.levels),
            seeds: other.seeds.or(self.seeds),
            out: other.out.or(self.out),
            omit_timing: other.omit_timing.or(self.omit_timing),
            aco: other.aco.or(self.aco),
            qaco: other.qaco.or(self.qaco),
            refinement: other.refinement.or(self.refinement),
            two_opt_passes: other.two_opt_passes.or(self.two_opt_passes),
            polish_iterations: other.polish_iterations.or(self.polish_iterations),
        }
    }

    pub fn into_run_config(self, base: RunConfig) -> Result<RunConfig, BenchError> {
        let mut cfg = base;
        if let Some(i) = self.instance {
            cfg.instances = i.into_vec().iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        }
        if let Some(s) = self.solver {
            cfg.solvers = s.into_vec().iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        }
        if let Some(m) = self.metric {
            cfg.metric = parse_metric(&m)?;
        }
        let kind = self.noise.as_deref().map(parse_noise_kind).transpose()?.unwrap_or(cfg.noise.kind);
        let rate = self.rate.unwrap_or(cfg.noise.rate);
        cfg.noise = NoiseSpec::new(kind, if kind == NoiseKind::None { 0.0 } else { rate })
            .map_err(|e| BenchError::Config(e.to_string()))?;
        if let Some(l) = self.levels {
            cfg.levels = l;
        }
        match self.seeds {
            Some(SeedList::Spec(s)) => cfg.seeds = parse_seeds(&s)?,
            Some(SeedList::List(v)) => cfg.seeds = v,
            None => {}
        }
        if let Some(o) = self.out {
            cfg.out = o;
        }
        if let Some(t) = self.omit_timing {
            cfg.omit_timing = t;
        }
        if let Some(a) = self.aco {
            cfg.aco = a;
        }
        if let Some(q) = self.qaco {
            cfg.qaco = q;
        }
        if let Some(r) = self.refinement {
            cfg.refinement = r;
        }
        if let Some(p) = self.two_opt_passes {
            cfg.two_opt_passes = p;
        }
        if let Some(p) = self.polish_iterations {
            cfg.polish_iterations = p;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names() {
        assert_eq!("QACO-hybrid".parse::<SolverKind>().unwrap(), SolverKind::QacoHybrid);
        assert_eq!("ClusteredACO".parse::<SolverKind>().unwrap(), SolverKind::ClusteredAco);
        assert_eq!("aco".parse::<SolverKind>().unwrap(), SolverKind::Aco);
        assert!("tabu".parse::<SolverKind>().is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn random_spec() {
        let s: InstanceSource = "random:64:42:1000".parse().unwrap();
        assert_eq!(s, InstanceSource::Random { n: 64, seed: 42, bound: 1000.0 });
        assert_eq!(s.to_string().parse::<InstanceSource>().unwrap(), s);
        assert!("random:x".parse::<InstanceSource>().is_err());
        assert_eq!(s.load().unwrap().dimension(), 64);
    }

    #[test]
    fn config_file_overrides() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"instance": ["a.tsp", "random:8"], "solver": "aco", "metric": "paper",
                "seeds": "0..2", "aco": {"iterations": 50}}"#,
        )
        .unwrap();
        let cfg = file.into_run_config(RunConfig::default()).unwrap();
        assert_eq!(cfg.instances.len(), 2);
        assert_eq!(cfg.solvers, vec![SolverKind::Aco]);
        assert_eq!(cfg.metric, MetricMode::PlainEuclidean);
        assert_eq!(cfg.seeds, vec![0, 1]);
        assert_eq!(cfg.aco.iterations, 50);
        assert_eq!(cfg.aco.n_ants, AcoParams::default().n_ants);
        assert!(serde_json::from_str::<ConfigFile>(r#"{"sovler": "aco"}"#).is_err());
    }

    #[test]
    fn noise_needs_quantum_solver() {
        let cfg = RunConfig {
            instances: vec!["random:8".parse().unwrap()],
            solvers: vec![SolverKind::Aco],
            noise: NoiseSpec::bit_flip(0.1).unwrap(),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
