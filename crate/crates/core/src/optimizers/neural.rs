//! GA-dA and GA-NADE: a genetic algorithm whose variation step samples from
//! a neural density model trained online on the fittest distinct members.

use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::{evaluate_all, Algorithm, OptimizerConfig, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::genotype::{Genotype, Population};
use crate::models::{DaModel, Model, NadeModel};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::selection::{init_population, rts_replace, tournament_select, truncation_select_unique};

/// Builds the initial model for `cfg.algorithm`.
pub fn initial_model(cfg: &OptimizerConfig, dim: usize, rng: &mut RngStream) -> Result<Model> {
    match cfg.algorithm {
        Algorithm::Da => {
            let mut m = DaModel::new(dim, cfg.hidden, cfg.corruption, cfg.learning_rate, rng);
            m.corruption_kind = cfg.corruption_kind;
            Ok(Model::Da(m))
        }
        Algorithm::Nade => {
            let m = NadeModel::new(dim, cfg.hidden, cfg.learning_rate, rng);
            match &cfg.ordering {
                Some(o) => Ok(Model::Nade(m.with_ordering(o.clone())?)),
                None => Ok(Model::Nade(m)),
            }
        }
        other => Err(Error::Config(format!("{other} is not a neural optimizer"))),
    }
}

/// `E` epochs of minibatch SGD over a shuffled copy of `data`.
pub fn train_model(
    model: &mut Model,
    data: &[Vec<bool>],
    epochs: usize,
    batch_size: usize,
    shuffle_rng: &mut RngStream,
    corruption_rng: &mut RngStream,
) -> Result<f64> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut last = f64::NAN;
    for _ in 0..epochs {
        order.shuffle(shuffle_rng);
        for chunk in order.chunks(batch_size) {
            let batch: Vec<&[bool]> = chunk.iter().map(|&i| data[i].as_slice()).collect();
            last = match model {
                Model::Da(m) => m.train_minibatch(&batch, corruption_rng)?,
                Model::Nade(m) => m.train_minibatch(&batch)?,
            };
        }
    }
    Ok(last)
}

/// GA-NADE variation: draws up to `factor * count` samples and keeps those
/// not already in the population. If too few are novel, the shortfall is
/// filled with the most recently drawn duplicates.
pub fn nade_offspring(
    model: &NadeModel,
    pop: &Population,
    count: usize,
    factor: usize,
    rng: &mut RngStream,
) -> Result<Vec<Genotype>> {
    let existing: HashSet<&[bool]> = pop.members().iter().map(Genotype::bits).collect();
    let mut fresh = Vec::with_capacity(count);
    let mut rejected = Vec::new();
    for _ in 0..count.saturating_mul(factor) {
        if fresh.len() == count {
            break;
        }
        let g = model.sample(rng, None)?;
        if existing.contains(g.bits()) {
            rejected.push(g);
        } else {
            fresh.push(g);
        }
    }
    let missing = count - fresh.len();
    fresh.extend(rejected.into_iter().rev().take(missing));
    Ok(fresh)
}

pub fn run_neural_eda(
    cfg: &OptimizerConfig,
    problem: &dyn Problem,
    seed: u64,
) -> Result<RunRecord> {
    cfg.validate()?;
    let dim = problem.dimension();
    let root = RngStream::new(seed);
    let mut init_rng = root.substream("init");
    let mut model_rng = root.substream("model");
    let mut shuffle_rng = root.substream("training");
    let mut corruption_rng = root.substream("corruption");
    let mut select_rng = root.substream("selection");
    let mut sample_rng = root.substream("sampling");
    let mut niche_rng = root.substream("niching");

    let mut pop = init_population(cfg.population, dim, &mut init_rng)?;
    pop.evaluate_all(problem)?;
    let mut model = initial_model(cfg, dim, &mut model_rng)?;
    let mut tracker = Tracker::new(problem);
    tracker.observe(pop.members());
    tracker.end_generation(0);

    let mut generation = 0;
    let mut failure = None;
    while tracker.evals < cfg.evals && !tracker.reached() {
        generation += 1;
        let training: Vec<Vec<bool>> =
            truncation_select_unique(pop.members(), cfg.training_fraction)
                .into_iter()
                .map(Genotype::into_bits)
                .collect();
        let step = (|| -> Result<Vec<Genotype>> {
            train_model(
                &mut model,
                &training,
                cfg.epochs,
                cfg.batch_size,
                &mut shuffle_rng,
                &mut corruption_rng,
            )?;
            match &model {
                Model::Da(m) => {
                    let inputs = tournament_select(
                        pop.members(),
                        cfg.population,
                        cfg.tournament_size,
                        &mut select_rng,
                    )?;
                    inputs
                        .iter()
                        .map(|x| m.sample(x.bits(), &mut sample_rng))
                        .collect()
                }
                Model::Nade(m) => nade_offspring(
                    m,
                    &pop,
                    cfg.population,
                    cfg.resample_factor,
                    &mut sample_rng,
                ),
            }
        })();
        let mut offspring = match step {
            Ok(o) => o,
            Err(Error::Numeric(msg)) => {
                failure = Some(format!("generation {generation}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        };
        evaluate_all(problem, &mut offspring)?;
        tracker.evals += offspring.len();
        tracker.observe(&offspring);
        if cfg.niching {
            for g in offspring {
                rts_replace(&mut pop, g, cfg.niche_window, &mut niche_rng)?;
            }
        } else {
            pop = Population::new(offspring)?;
        }
        pop.generation = generation;
        tracker.end_generation(generation);
    }
    Ok(tracker.finish(cfg, problem, seed, pop, failure, Some(model)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Hiff, OneMax};

    fn cfg(algorithm: Algorithm) -> OptimizerConfig {
        OptimizerConfig {
            algorithm,
            population: 40,
            hidden: 12,
            evals: 4000,
            learning_rate: 0.1,
            ..Default::default()
        }
    }

    #[test]
    fn accounting_and_monotone_history() {
        for alg in [Algorithm::Da, Algorithm::Nade] {
            for niching in [false, true] {
                let c = OptimizerConfig {
                    niching,
                    ..cfg(alg)
                };
                let r = run_neural_eda(&c, &Hiff::new(16).unwrap(), 3).unwrap();
                assert_eq!(r.evals_used, c.population * r.generations());
                assert!(r.evals_used <= c.evals + c.population);
                assert!(r
                    .history
                    .windows(2)
                    .all(|w| w[1].best_fitness >= w[0].best_fitness));
                assert_eq!(r.final_population.len(), c.population);
                assert!(r.model.is_some());
            }
        }
    }

    #[test]
    fn budget_of_one_generation() {
        let c = OptimizerConfig {
            evals: 40,
            ..cfg(Algorithm::Da)
        };
        let r = run_neural_eda(&c, &OneMax::new(64), 1).unwrap();
        assert_eq!(r.generations(), 1);
        assert_eq!(r.evals_used, 40);
        assert_eq!(r.history.len(), 2);
    }

    #[test]
    fn solves_small_onemax_and_halts() {
        for alg in [Algorithm::Da, Algorithm::Nade] {
            let r = run_neural_eda(&cfg(alg), &OneMax::new(12), 5).unwrap();
            assert!(r.success, "{alg}");
            assert_eq!(r.evals_to_optimum, Some(r.evals_used));
            assert_eq!(r.best_fitness(), 12.0);
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        for alg in [Algorithm::Da, Algorithm::Nade] {
            let a = run_neural_eda(&cfg(alg), &Hiff::new(16).unwrap(), 9).unwrap();
            let b = run_neural_eda(&cfg(alg), &Hiff::new(16).unwrap(), 9).unwrap();
            assert_eq!(a.history, b.history);
            assert_eq!(a.final_population, b.final_population);
            assert_eq!(a.model, b.model);
        }
    }

    #[test]
    fn nade_offspring_prefers_novel_samples() {
        let mut rng = RngStream::new(4);
        let m = NadeModel::new(4, 3, 0.1, &mut rng);
        let pop = init_population(10, 4, &mut rng).unwrap();
        let out = nade_offspring(&m, &pop, 10, 10, &mut rng).unwrap();
        assert_eq!(out.len(), 10);
        let novel = out.iter().filter(|g| !pop.contains_bits(g.bits())).count();
        let dups = out.len() - novel;
        // duplicates appear only after the novel ones, as filler
        assert!(out[..novel].iter().all(|g| !pop.contains_bits(g.bits())));
        assert!(dups == 0 || novel < 10);
    }
}
