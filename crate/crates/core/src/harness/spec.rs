use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::optimizers::OptimizerConfig;
use crate::problems::{
    gen_random_knapsack, CnfFormula, Hiff, Knapsack, KnapsackInstance, MaskedProblem, MaxSat,
    OneMax, Problem, RoyalRoad, RoyalRoadSpec, RrLinkSpec, RrLinkages,
};
use crate::rng::RngStream;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "NNEDA_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Mask maskable problems for the neural optimizers only.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemKind {
    OneMax {
        length: usize,
    },
    Hiff {
        length: usize,
    },
    RoyalRoad {
        length: usize,
        block: usize,
    },
    RrLinkages {
        k: usize,
        n: usize,
    },
    /// DIMACS CNF file; the optimum defaults to the clause count.
    Maxsat {
        path: PathBuf,
        optimum: Option<f64>,
    },
    Knapsack {
        path: PathBuf,
        optimum: Option<i64>,
    },
    RandomKnapsack {
        items: usize,
        constraints: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub kind: ProblemKind,
    #[serde(default)]
    pub mask: MaskMode,
}

impl ProblemSpec {
    /// Builds the problem. Relative instance paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Arc<dyn Problem>> {
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let load_err = |p: &Path, e: Error| {
            Error::Config(format!("cannot load instance {}: {e}", p.display()))
        };
        Ok(match &self.kind {
            ProblemKind::OneMax { length } => Arc::new(OneMax::new(*length)),
            ProblemKind::Hiff { length } => Arc::new(Hiff::new(*length)?),
            ProblemKind::RoyalRoad { length, block } => {
                Arc::new(RoyalRoad::new(RoyalRoadSpec::new(*length, *block)?))
            }
            ProblemKind::RrLinkages { k, n } => Arc::new(RrLinkages::new(RrLinkSpec::new(*k, *n)?)),
            ProblemKind::Maxsat { path, optimum } => {
                let full = resolve(path);
                let formula = CnfFormula::from_path(&full).map_err(|e| load_err(&full, e))?;
                let label = stem(path);
                let problem = MaxSat::new(formula, label);
                Arc::new(match optimum {
                    Some(o) => problem.with_optimum(Some(*o)),
                    None => problem,
                })
            }
            ProblemKind::Knapsack { path, optimum } => {
                let full = resolve(path);
                let mut inst =
                    KnapsackInstance::from_path(&full).map_err(|e| load_err(&full, e))?;
                if optimum.is_some() {
                    inst = inst.with_optimum(*optimum);
                }
                Arc::new(Knapsack::new(inst, stem(path)))
            }
            ProblemKind::RandomKnapsack {
                items,
                constraints,
                seed,
            } => {
                let mut rng = RngStream::new(*seed).substream("knapsack");
                let inst = gen_random_knapsack(*items, *constraints, &mut rng)?;
                Arc::new(Knapsack::new(
                    inst,
                    format!("random-{items}x{constraints}-{seed}"),
                ))
            }
        })
    }

    pub fn masked_for(&self, problem: &dyn Problem, neural: bool) -> bool {
        match self.mask {
            MaskMode::Always => true,
            MaskMode::Never => false,
            MaskMode::Auto => neural && problem.maskable(),
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

/// One algorithm of an experiment: a labelled config, optionally with grid
/// ranges over config fields.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmEntry {
    pub label: String,
    pub config: OptimizerConfig,
    /// Field name to candidate values, for grid search.
    pub grid: BTreeMap<String, Vec<toml::Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    #[serde(default = "one")]
    trials: usize,
    #[serde(default)]
    base_seed: u64,
    output_dir: Option<PathBuf>,
    #[serde(default = "one")]
    jobs: usize,
    #[serde(default)]
    save_models: bool,
    #[serde(default = "three")]
    grid_trials: usize,
    problem: ProblemSpec,
    algorithm: Vec<toml::Table>,
}

fn one() -> usize {
    1
}

fn three() -> usize {
    3
}

/// A loaded experiment. The problem instance is built at load time so a bad
/// path fails before any trial runs.
#[derive(Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub save_models: bool,
    pub grid_trials: usize,
    pub problem_spec: ProblemSpec,
    pub problem: Arc<dyn Problem>,
    pub algorithms: Vec<AlgorithmEntry>,
}

impl std::fmt::Debug for ExperimentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExperimentSpec")
            .field("name", &self.name)
            .field("trials", &self.trials)
            .field("base_seed", &self.base_seed)
            .field("problem", &self.problem.name())
            .field("algorithms", &self.algorithms)
            .finish()
    }
}

impl ExperimentSpec {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read spec {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parses a spec; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.trials == 0 || raw.jobs == 0 || raw.grid_trials == 0 {
            return Err(Error::Config(
                "trials, jobs and grid_trials must be at least 1".into(),
            ));
        }
        if raw.algorithm.is_empty() {
            return Err(Error::Config("spec lists no algorithm".into()));
        }
        let algorithms = raw
            .algorithm
            .into_iter()
            .map(parse_entry)
            .collect::<Result<Vec<_>>>()?;
        let mut labels = std::collections::HashSet::new();
        for a in &algorithms {
            if !labels.insert(a.label.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate algorithm label {:?}",
                    a.label
                )));
            }
        }
        let output_dir = match raw.output_dir {
            Some(d) if d.is_absolute() => d,
            Some(d) => base.join(d),
            None => default_output_root().join(&raw.name),
        };
        let problem = raw.problem.build(base)?;
        Ok(Self {
            name: raw.name,
            trials: raw.trials,
            base_seed: raw.base_seed,
            output_dir,
            jobs: raw.jobs,
            save_models: raw.save_models,
            grid_trials: raw.grid_trials,
            problem_spec: raw.problem,
            problem,
            algorithms,
        })
    }

    /// Seed of trial `t`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    /// The problem seen by `entry` in the trial with `seed`, and the mask
    /// applied to it, if any.
    pub fn trial_problem(
        &self,
        entry: &AlgorithmEntry,
        seed: u64,
    ) -> Result<(Arc<dyn Problem>, Option<Genotype>)> {
        if !self
            .problem_spec
            .masked_for(self.problem.as_ref(), entry.config.algorithm.is_neural())
        {
            return Ok((self.problem.clone(), None));
        }
        let mut rng = RngStream::new(seed).substream("mask");
        let mask = Genotype::random(self.problem.dimension(), &mut rng);
        let masked = MaskedProblem::new(self.problem.clone(), mask.clone())?;
        Ok((Arc::new(masked), Some(mask)))
    }
}

fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

fn parse_entry(mut table: toml::Table) -> Result<AlgorithmEntry> {
    let label = match table.remove("label") {
        Some(toml::Value::String(s)) => Some(s),
        Some(other) => {
            return Err(Error::Config(format!(
                "label must be a string, got {other}"
            )))
        }
        None => None,
    };
    let use_defaults = match table.remove("grid_defaults") {
        Some(toml::Value::Boolean(b)) => b,
        Some(other) => {
            return Err(Error::Config(format!(
                "grid_defaults must be a boolean, got {other}"
            )))
        }
        None => false,
    };
    let mut grid = BTreeMap::new();
    match table.remove("grid") {
        Some(toml::Value::Table(t)) => {
            for (k, v) in t {
                match v {
                    toml::Value::Array(values) => {
                        grid.insert(k, values);
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "grid range {k} must be an array, got {other}"
                        )))
                    }
                }
            }
        }
        Some(other) => return Err(Error::Config(format!("grid must be a table, got {other}"))),
        None => {}
    }
    let config: OptimizerConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if use_defaults {
        for (k, v) in super::default_grid(config.algorithm) {
            grid.entry(k).or_insert(v);
        }
    }
    config.validate()?;
    let label = label.unwrap_or_else(|| config.algorithm.to_string());
    Ok(AlgorithmEntry {
        label,
        config,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::Algorithm;

    const SPEC: &str = r#"
name = "demo"
trials = 3
base_seed = 10
output_dir = "out"

[problem]
kind = "royal_road"
length = 16
block = 4

[[algorithm]]
label = "dA"
algorithm = "da"
population = 20
evals = 200

[[algorithm]]
algorithm = "ga"
population = 20
evals = 200
[algorithm.grid]
crossover_prob = [0.5, 0.9]
"#;

    #[test]
    fn parses_spec() {
        let s = ExperimentSpec::from_toml(SPEC, Path::new("/tmp/x")).unwrap();
        assert_eq!(s.trials, 3);
        assert_eq!(s.output_dir, PathBuf::from("/tmp/x/out"));
        assert_eq!(s.algorithms[0].label, "dA");
        assert_eq!(s.algorithms[1].label, "ga");
        assert_eq!(s.algorithms[1].config.algorithm, Algorithm::Ga);
        assert_eq!(s.algorithms[1].grid["crossover_prob"].len(), 2);
        assert_eq!(s.problem.dimension(), 16);
        assert_eq!(s.trial_seed(2), 12);
    }

    #[test]
    fn masks_only_neural_by_default() {
        let s = ExperimentSpec::from_toml(SPEC, Path::new(".")).unwrap();
        let (_, m) = s.trial_problem(&s.algorithms[0], 5).unwrap();
        let (_, m2) = s.trial_problem(&s.algorithms[0], 5).unwrap();
        assert_eq!(m, m2);
        assert!(m.is_some());
        assert!(s.trial_problem(&s.algorithms[1], 5).unwrap().1.is_none());
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            SPEC.replace("trials = 3", "trials = 0"),
            SPEC.replace(
                "population = 20\nevals = 200\n\n[[algorithm]]",
                "population = 20\nevals = 10\n\n[[algorithm]]",
            ),
            SPEC.replace("label = \"dA\"", "label = \"ga\""),
            SPEC.replace("block = 4", "block = 5"),
            SPEC.replace(
                "evals = 200\n[algorithm.grid]",
                "evals = 200\nbogus = 1\n[algorithm.grid]",
            ),
        ];
        for b in bad {
            assert!(
                ExperimentSpec::from_toml(&b, Path::new(".")).is_err(),
                "{b}"
            );
        }
    }

    #[test]
    fn missing_instance_is_config_error() {
        let text = SPEC.replace(
            "kind = \"royal_road\"\nlength = 16\nblock = 4",
            "kind = \"maxsat\"\npath = \"does-not-exist.cnf\"",
        );
        let err = ExperimentSpec::from_toml(&text, Path::new(".")).unwrap_err();
        assert_eq!(err.kind(), "config");
    }
}
