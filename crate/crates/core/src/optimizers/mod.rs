//! The optimization loops: GA-dA and GA-NADE plus the GA, PBIL and BOA
//! baselines. Every run is a pure function of `(config, problem, seed)`.

pub mod boa;
pub mod ga;
pub mod neural;
pub mod pbil;

use serde::{Deserialize, Serialize};

pub use boa::{learn_network, run_boa, BayesNet};
pub use ga::{run_ga, two_point_crossover};
pub use neural::run_neural_eda;
pub use pbil::{run_pbil, Pbil};

use crate::error::{Error, Result};
use crate::genotype::{Genotype, Population};
use crate::models::{CorruptionKind, Model};
use crate::problems::Problem;

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Da,
    Nade,
    Ga,
    Pbil,
    Boa,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Da => "da",
            Algorithm::Nade => "nade",
            Algorithm::Ga => "ga",
            Algorithm::Pbil => "pbil",
            Algorithm::Boa => "boa",
        }
    }

    pub fn is_neural(&self) -> bool {
        matches!(self, Algorithm::Da | Algorithm::Nade)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters for one run. Fields irrelevant to the chosen algorithm
/// are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Population size P.
    pub population: usize,
    /// Fraction T of the population used for training / model building.
    pub training_fraction: f64,
    /// Training epochs per generation E.
    pub epochs: usize,
    pub learning_rate: f64,
    /// Hidden units H.
    pub hidden: usize,
    pub batch_size: usize,
    pub niching: bool,
    /// Restricted tournament selection window W.
    pub niche_window: usize,
    /// Evaluation budget.
    pub evals: usize,
    /// dA corruption level p(c).
    pub corruption: f64,
    pub corruption_kind: CorruptionKind,
    /// Tournament size for dA inputs and GA parents.
    pub tournament_size: usize,
    pub crossover_prob: f64,
    /// Per-bit GA mutation rate; `1/D` when unset.
    pub mutation_rate: Option<f64>,
    /// PBIL learning rate alpha.
    pub pbil_rate: f64,
    pub pbil_mutation_prob: f64,
    pub pbil_mutation_shift: f64,
    pub boa_max_parents: usize,
    /// GA-NADE draws at most this many times P candidates per generation
    /// while looking for genotypes absent from the population.
    pub resample_factor: usize,
    /// NADE variable ordering; natural order when unset.
    pub ordering: Option<Vec<usize>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Da,
            population: 100,
            training_fraction: 0.5,
            epochs: 1,
            learning_rate: 0.1,
            hidden: 32,
            batch_size: 20,
            niching: false,
            niche_window: 20,
            evals: 100_000,
            corruption: 0.1,
            corruption_kind: CorruptionKind::SaltPepper,
            tournament_size: 2,
            crossover_prob: 0.9,
            mutation_rate: None,
            pbil_rate: 0.1,
            pbil_mutation_prob: 0.02,
            pbil_mutation_shift: 0.05,
            boa_max_parents: 2,
            resample_factor: 10,
            ordering: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population == 0 {
            return fail("population must be positive".into());
        }
        if !(self.training_fraction > 0.0 && self.training_fraction <= 1.0) {
            return fail(format!(
                "training_fraction {} outside (0, 1]",
                self.training_fraction
            ));
        }
        if self.evals < self.population {
            return fail(format!(
                "evaluation budget {} smaller than population {}",
                self.evals, self.population
            ));
        }
        if self.niching && (self.niche_window == 0 || self.niche_window > self.population) {
            return fail(format!(
                "niche_window {} outside [1, population]",
                self.niche_window
            ));
        }
        if self.tournament_size == 0 || self.batch_size == 0 || self.resample_factor == 0 {
            return fail("tournament_size, batch_size and resample_factor must be positive".into());
        }
        let positive = [
            ("learning_rate", self.learning_rate),
            ("pbil_rate", self.pbil_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        let unit = [
            ("corruption", self.corruption),
            ("crossover_prob", self.crossover_prob),
            ("pbil_rate", self.pbil_rate),
            ("pbil_mutation_prob", self.pbil_mutation_prob),
            ("pbil_mutation_shift", self.pbil_mutation_shift),
            ("mutation_rate", self.mutation_rate.unwrap_or(0.0)),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} {v} outside [0, 1]"));
            }
        }
        if self.algorithm.is_neural() && (self.hidden == 0 || self.epochs == 0) {
            return fail("neural optimizers need hidden > 0 and epochs > 0".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationStat {
    pub generation: usize,
    pub evals: usize,
    /// Best fitness seen so far in the run.
    pub best_fitness: f64,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub problem: String,
    pub seed: u64,
    pub config: OptimizerConfig,
    /// One entry per generation; generation 0 is the initial population.
    pub history: Vec<GenerationStat>,
    pub evals_used: usize,
    pub evals_to_optimum: Option<usize>,
    pub success: bool,
    pub best: Genotype,
    pub final_population: Population,
    /// Diagnostic for a run aborted by a numeric failure.
    pub failure: Option<String>,
    /// Final model of a neural run.
    pub model: Option<Model>,
}

impl RunRecord {
    pub fn best_fitness(&self) -> f64 {
        self.best.fitness().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn generations(&self) -> usize {
        self.history.last().map_or(0, |s| s.generation)
    }
}

/// Runs the configured algorithm on `problem`.
pub fn run(cfg: &OptimizerConfig, problem: &dyn Problem, seed: u64) -> Result<RunRecord> {
    match cfg.algorithm {
        Algorithm::Da | Algorithm::Nade => run_neural_eda(cfg, problem, seed),
        Algorithm::Ga => run_ga(cfg, problem, seed),
        Algorithm::Pbil => run_pbil(cfg, problem, seed),
        Algorithm::Boa => run_boa(cfg, problem, seed),
    }
}

const OPTIMUM_TOL: f64 = 1e-9;

/// Best-so-far bookkeeping shared by the optimizers.
pub(crate) struct Tracker {
    optimum: Option<f64>,
    pub history: Vec<GenerationStat>,
    pub best: Option<Genotype>,
    pub evals: usize,
    pub evals_to_optimum: Option<usize>,
}

impl Tracker {
    pub fn new(problem: &dyn Problem) -> Self {
        Self {
            optimum: problem.optimum(),
            history: Vec::new(),
            best: None,
            evals: 0,
            evals_to_optimum: None,
        }
    }

    pub fn observe(&mut self, candidates: &[Genotype]) {
        for g in candidates {
            let f = g.fitness().unwrap_or(f64::NEG_INFINITY);
            if self
                .best
                .as_ref()
                .is_none_or(|b| f > b.fitness().unwrap_or(f64::NEG_INFINITY))
            {
                self.best = Some(g.clone());
            }
        }
        if self.evals_to_optimum.is_none() && self.reached() {
            self.evals_to_optimum = Some(self.evals);
        }
    }

    pub fn reached(&self) -> bool {
        match (self.optimum, self.best.as_ref().and_then(Genotype::fitness)) {
            (Some(opt), Some(f)) => f >= opt - OPTIMUM_TOL,
            _ => false,
        }
    }

    pub fn end_generation(&mut self, generation: usize) {
        self.history.push(GenerationStat {
            generation,
            evals: self.evals,
            best_fitness: self
                .best
                .as_ref()
                .and_then(Genotype::fitness)
                .unwrap_or(f64::NEG_INFINITY),
        });
    }

    pub fn finish(
        self,
        cfg: &OptimizerConfig,
        problem: &dyn Problem,
        seed: u64,
        final_population: Population,
        failure: Option<String>,
        model: Option<Model>,
    ) -> RunRecord {
        let success = failure.is_none() && self.reached();
        RunRecord {
            algorithm: cfg.algorithm,
            problem: problem.name(),
            seed,
            config: cfg.clone(),
            history: self.history,
            evals_used: self.evals,
            evals_to_optimum: if success { self.evals_to_optimum } else { None },
            success,
            best: self
                .best
                .unwrap_or_else(|| Genotype::zeros(problem.dimension())),
            final_population,
            failure,
            model,
        }
    }
}

pub(crate) fn evaluate_all(problem: &dyn Problem, genotypes: &mut [Genotype]) -> Result<()> {
    for g in genotypes {
        g.evaluate(problem)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = |f: fn(&mut OptimizerConfig)| {
            let mut c = OptimizerConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.training_fraction = 0.0));
        assert!(bad(|c| c.training_fraction = 1.5));
        assert!(bad(|c| c.evals = 10));
        assert!(bad(|c| c.learning_rate = 0.0));
        assert!(bad(|c| c.corruption = 1.2));
        assert!(bad(|c| {
            c.niching = true;
            c.niche_window = 1000;
        }));
        assert!(bad(|c| c.population = 0));
    }

    #[test]
    fn config_from_toml_with_defaults() {
        let cfg: OptimizerConfig =
            toml::from_str("algorithm = \"nade\"\npopulation = 40\nevals = 400\n").unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Nade);
        assert_eq!(cfg.population, 40);
        assert_eq!(cfg.batch_size, 20);
        assert!(toml::from_str::<OptimizerConfig>("bogus = 1").is_err());
    }
}
