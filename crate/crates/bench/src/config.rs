//! Experiment configuration: one TOML file describing a domain, an
//! objective and the solver runs to execute on it.
//!
//! ```toml
//! output_dir = "traces"
//!
//! [domain]
//! kind = "spanning_tree"
//! nodes = 6
//!
//! [objective]
//! kind = "regression"
//! density = 0.5
//! rows = 5
//! seed = 0
//!
//! [[run]]
//! name = "lazy"
//! algorithm = "lazy_cg_parameter_free"
//! epsilon = 1e-4
//! ```

use std::collections::HashSet;
use std::path::PathBuf;

use lazycg_core::algorithms::{OnlineGamma, Phi0Policy, SolverConfig, StepRule};
use lazycg_core::domains::Graph;
use lazycg_core::objectives::{
    generate_identity_instance, generate_linear_stream, generate_regression_instance, LossStream,
};
use lazycg_core::weaksep::{Backend, CacheConfig};
use lazycg_core::{Domain, QuadraticObjective};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub domain: DomainSpec,
    pub objective: ObjectiveSpec,
    #[serde(rename = "run")]
    pub runs: Vec<RunSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("traces")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Simplex {
        n: usize,
        mu: Option<f64>,
    },
    Hypercube {
        n: usize,
        mu: Option<f64>,
    },
    /// Complete graph on `nodes` unless `edges` is given.
    SpanningTree {
        nodes: usize,
        edges: Option<Vec<(usize, usize)>>,
        mu: Option<f64>,
    },
    ShortestPath {
        nodes: usize,
        edges: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
        mu: Option<f64>,
    },
    VertexList {
        vertices: Vec<Vec<f64>>,
        mu: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `‖Ax - b‖²` with a random sparse `A`.
    Regression {
        density: f64,
        rows: usize,
        seed: u64,
    },
    /// `‖x - b‖²` with random `b`.
    Identity { seed: u64 },
    /// `‖Ax - b‖²` with `A` given row by row.
    Quadratic { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// Random linear losses for the online solvers.
    LinearStream { rounds: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    VanillaFw,
    LazyCgTextbook,
    LazyCgParameterFree,
    LazyPairwiseCg,
    LazyLocalCg,
    LazyOnlineCg,
    RunAdversarial,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::VanillaFw => "vanilla_fw",
            Algorithm::LazyCgTextbook => "lazy_cg_textbook",
            Algorithm::LazyCgParameterFree => "lazy_cg_parameter_free",
            Algorithm::LazyPairwiseCg => "lazy_pairwise_cg",
            Algorithm::LazyLocalCg => "lazy_local_cg",
            Algorithm::LazyOnlineCg => "lazy_online_cg",
            Algorithm::RunAdversarial => "run_adversarial",
        }
    }

    pub fn is_online(self) -> bool {
        matches!(self, Algorithm::LazyOnlineCg | Algorithm::RunAdversarial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Phi0Spec {
    Named(Phi0Name),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi0Name {
    Exact,
    Halving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleSpec {
    Lmo,
    Augmentation,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSpec {
    Schedule,
    LineSearch,
    ShortStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Smooth,
    StronglyConvex,
}

/// One solver run; unset fields take the solver defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: String,
    pub algorithm: Algorithm,
    pub k: Option<f64>,
    pub max_iters: Option<usize>,
    pub time_limit_s: Option<f64>,
    pub epsilon: Option<f64>,
    pub phi0: Option<Phi0Spec>,
    pub step: Option<StepSpec>,
    pub cache: Option<bool>,
    pub keep_size: Option<usize>,
    pub eviction_period: Option<usize>,
    pub oracle: Option<OracleSpec>,
    /// Cache off, `K = 1`, threshold-free exact LMO answers.
    #[serde(default)]
    pub non_lazy: bool,
    pub curvature: Option<f64>,
    pub strong_convexity: Option<f64>,
    pub smoothness: Option<f64>,
    pub sparsity: Option<usize>,
    #[serde(default)]
    pub improved_negative: bool,
    pub online_b: Option<f64>,
    pub online_s: Option<f64>,
    pub online_gamma: Option<GammaSpec>,
    pub seed: Option<u64>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub time_limit_s: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub no_cache: bool,
    pub oracle: Option<OracleSpec>,
}

/// The objective built from an [`ObjectiveSpec`].
#[derive(Debug, Clone)]
pub enum Instance {
    Offline(QuadraticObjective),
    Online(LossStream),
}

/// Parses a config, reporting TOML and schema errors with their location.
pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    cfg.check()?;
    Ok(cfg)
}

impl ExperimentConfig {
    fn check(&self) -> Result<(), String> {
        if self.runs.is_empty() {
            return Err("at least one [[run]] is required".into());
        }
        let mut seen = HashSet::new();
        for (i, run) in self.runs.iter().enumerate() {
            if run.name.is_empty()
                || !run
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "_-.=".contains(c))
            {
                return Err(format!(
                    "run[{i}]: name {:?} must be non-empty and use only [A-Za-z0-9_.=-]",
                    run.name
                ));
            }
            if !seen.insert(run.name.as_str()) {
                return Err(format!("run[{i}]: duplicate run name {:?}", run.name));
            }
            let online = matches!(self.objective, ObjectiveSpec::LinearStream { .. });
            if run.algorithm.is_online() != online {
                return Err(format!(
                    "run {:?}: {} needs {} objective",
                    run.name,
                    run.algorithm.name(),
                    if online { "an offline" } else { "a linear_stream" }
                ));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            match &mut self.objective {
                ObjectiveSpec::Regression { seed: s, .. }
                | ObjectiveSpec::Identity { seed: s }
                | ObjectiveSpec::LinearStream { seed: s, .. } => *s = seed,
                ObjectiveSpec::Quadratic { .. } => {}
            }
        }
        for run in self.runs.iter_mut() {
            if o.time_limit_s.is_some() {
                run.time_limit_s = o.time_limit_s;
            }
            if let Some(seed) = o.seed {
                run.seed = Some(seed);
            }
            if o.no_cache {
                run.cache = Some(false);
            }
            if o.oracle.is_some() {
                run.oracle = o.oracle;
            }
        }
    }

    pub fn run(&self, name: &str) -> Option<&RunSpec> {
        self.runs.iter().find(|r| r.name == name)
    }
}

fn core_err(section: &str, e: lazycg_core::Error) -> String {
    format!("[{section}]: {e}")
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain, String> {
        let err = |e| core_err("domain", e);
        let (domain, mu) = match self {
            DomainSpec::Simplex { n, mu } => (Domain::simplex(*n).map_err(err)?, *mu),
            DomainSpec::Hypercube { n, mu } => (Domain::hypercube(*n).map_err(err)?, *mu),
            DomainSpec::SpanningTree { nodes, edges, mu } => {
                let graph = match edges {
                    Some(e) => Graph::new(*nodes, e.clone()),
                    None => Graph::complete(*nodes),
                }
                .map_err(err)?;
                (Domain::spanning_tree(graph).map_err(err)?, *mu)
            }
            DomainSpec::ShortestPath {
                nodes,
                edges,
                source,
                sink,
                mu,
            } => {
                let graph = Graph::new(*nodes, edges.clone()).map_err(err)?;
                (Domain::shortest_path(graph, *source, *sink).map_err(err)?, *mu)
            }
            DomainSpec::VertexList { vertices, mu } => {
                (Domain::vertex_list(vertices.clone()).map_err(err)?, *mu)
            }
        };
        match mu {
            Some(mu) => domain.with_mu(mu).map_err(err),
            None => Ok(domain),
        }
    }
}

impl ObjectiveSpec {
    pub fn build(&self, domain: &Domain) -> Result<Instance, String> {
        let err = |e| core_err("objective", e);
        Ok(match self {
            ObjectiveSpec::Regression {
                density,
                rows,
                seed,
            } => Instance::Offline(
                generate_regression_instance(domain, *density, *rows, *seed).map_err(err)?,
            ),
            ObjectiveSpec::Identity { seed } => {
                Instance::Offline(generate_identity_instance(domain, *seed).map_err(err)?)
            }
            ObjectiveSpec::Quadratic { a, b } => {
                let n = domain.dimension();
                if let Some(row) = a.iter().position(|r| r.len() != n) {
                    return Err(format!(
                        "[objective]: row {row} of a has {} entries, domain dimension is {n}",
                        a[row].len()
                    ));
                }
                let flat = a.concat();
                Instance::Offline(
                    QuadraticObjective::new(flat, a.len(), b.clone(), domain).map_err(err)?,
                )
            }
            ObjectiveSpec::LinearStream { rounds, seed } => Instance::Online(
                generate_linear_stream(domain.dimension(), *rounds, *seed).map_err(err)?,
            ),
        })
    }
}

impl RunSpec {
    pub fn solver_config(&self) -> Result<SolverConfig, String> {
        let d = SolverConfig::default();
        let mut cache = CacheConfig {
            enabled: self.cache.unwrap_or(true),
            keep_size: self.keep_size.unwrap_or(d.cache.keep_size),
            eviction_period: self.eviction_period.unwrap_or(d.cache.eviction_period),
        };
        if cache.keep_size == 0 || cache.eviction_period == 0 {
            return Err(format!(
                "run {:?}: keep_size and eviction_period must be positive",
                self.name
            ));
        }
        let mut k = self.k.unwrap_or(d.k);
        let mut backend = match self.oracle.unwrap_or(OracleSpec::Lmo) {
            OracleSpec::Lmo => Backend::Lmo,
            OracleSpec::Augmentation => Backend::Augmentation,
            OracleSpec::Exact => Backend::Exact,
        };
        if self.non_lazy {
            cache = CacheConfig::disabled();
            k = 1.0;
            backend = Backend::Exact;
        }
        let cfg = SolverConfig {
            k,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            time_limit_s: self.time_limit_s,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            phi0: match self.phi0 {
                None | Some(Phi0Spec::Named(Phi0Name::Exact)) => Phi0Policy::ExactLp,
                Some(Phi0Spec::Named(Phi0Name::Halving)) => Phi0Policy::Halving,
                Some(Phi0Spec::Value(v)) => Phi0Policy::Value(v),
            },
            step: match self.step {
                None => d.step,
                Some(StepSpec::Schedule) => StepRule::Schedule,
                Some(StepSpec::LineSearch) => StepRule::LineSearch,
                Some(StepSpec::ShortStep) => StepRule::ShortStep,
            },
            cache,
            backend,
            seed: self.seed.unwrap_or(d.seed),
            curvature: self.curvature,
            strong_convexity: self.strong_convexity,
            smoothness: self.smoothness,
            sparsity: self.sparsity,
            improved_negative: self.improved_negative,
            online_b: self.online_b.unwrap_or(d.online_b),
            online_s: self.online_s.unwrap_or(d.online_s),
            online_gamma: match self.online_gamma {
                None => d.online_gamma,
                Some(GammaSpec::Smooth) => OnlineGamma::Smooth,
                Some(GammaSpec::StronglyConvex) => OnlineGamma::StronglyConvex,
            },
            audit: true,
            start: None,
        };
        cfg.validate()
            .map_err(|e| format!("run {:?}: {e}", self.name))?;
        Ok(cfg)
    }
}

/// A fully built experiment: everything needed to execute without further
/// validation failures.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub domain: Domain,
    pub instance: Instance,
    pub solvers: Vec<SolverConfig>,
}

pub fn prepare(config: ExperimentConfig) -> Result<Prepared, String> {
    let domain = config.domain.build()?;
    let instance = config.objective.build(&domain)?;
    let solvers = config
        .runs
        .iter()
        .map(RunSpec::solver_config)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Prepared {
        config,
        domain,
        instance,
        solvers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[domain]
kind = "simplex"
n = 3

[objective]
kind = "identity"
seed = 1

[[run]]
name = "a"
algorithm = "lazy_cg_parameter_free"
phi0 = "halving"
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse(BASE).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("traces"));
        assert_eq!(cfg.runs[0].phi0, Some(Phi0Spec::Named(Phi0Name::Halving)));
        let p = prepare(cfg).unwrap();
        assert_eq!(p.domain.dimension(), 3);
        assert_eq!(p.solvers[0].phi0, Phi0Policy::Halving);
    }

    #[test]
    fn numeric_phi0() {
        let cfg = parse(&BASE.replace("\"halving\"", "0.5")).unwrap();
        assert_eq!(cfg.runs[0].phi0, Some(Phi0Spec::Value(0.5)));
    }

    #[test]
    fn errors_carry_location() {
        let err = parse(&BASE.replace("n = 3", "n = \"three\"")).unwrap_err();
        assert!(err.contains("line"), "{err}");
        let err = parse(&BASE.replace("lazy_cg_parameter_free", "nope")).unwrap_err();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rejects_missing_seed_and_duplicates() {
        assert!(parse(&BASE.replace("seed = 1", "")).is_err());
        let dup = format!("{BASE}\n[[run]]\nname = \"a\"\nalgorithm = \"vanilla_fw\"\n");
        assert!(parse(&dup).unwrap_err().contains("duplicate"));
    }

    #[test]
    fn rejects_online_mismatch() {
        let err = parse(&BASE.replace("lazy_cg_parameter_free", "lazy_online_cg")).unwrap_err();
        assert!(err.contains("linear_stream"));
    }

    #[test]
    fn non_lazy_overrides_cache_and_k() {
        let text = BASE.replace("phi0 = \"halving\"", "k = 2.0\nnon_lazy = true");
        let p = prepare(parse(&text).unwrap()).unwrap();
        assert_eq!(p.solvers[0].k, 1.0);
        assert!(!p.solvers[0].cache.enabled);
        assert_eq!(p.solvers[0].backend, Backend::Exact);
    }

    #[test]
    fn overrides_apply_to_every_run() {
        let mut cfg = parse(BASE).unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            no_cache: true,
            oracle: Some(OracleSpec::Augmentation),
            ..Overrides::default()
        });
        assert!(matches!(cfg.objective, ObjectiveSpec::Identity { seed: 9 }));
        assert_eq!(cfg.runs[0].cache, Some(false));
        // the augmentation oracle needs K > 1
        assert!(prepare(cfg).is_err());
    }
}
