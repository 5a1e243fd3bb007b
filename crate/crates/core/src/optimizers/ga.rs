//! Generational GA with tournament selection, two-point crossover, per-bit
//! mutation and single-member elitism.

use rand::Rng;

use super::{evaluate_all, OptimizerConfig, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::genotype::{Genotype, Population};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::selection::{init_population, tournament_index};

/// Swaps the loci in `[a, b)` between two parents.
pub fn two_point_crossover(
    p1: &[bool],
    p2: &[bool],
    a: usize,
    b: usize,
) -> Result<(Vec<bool>, Vec<bool>)> {
    Error::check_dim(p1.len(), p2.len())?;
    if a > b || b > p1.len() {
        return Err(Error::Config(format!(
            "crossover points ({a}, {b}) invalid for length {}",
            p1.len()
        )));
    }
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    c1[a..b].copy_from_slice(&p2[a..b]);
    c2[a..b].copy_from_slice(&p1[a..b]);
    Ok((c1, c2))
}

/// Flips each bit independently with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(bits: &mut [bool], rate: f64, rng: &mut R) {
    for b in bits {
        if rng.random_bool(rate) {
            *b = !*b;
        }
    }
}

fn cut_points<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..=len);
    let b = rng.random_range(0..=len);
    (a.min(b), a.max(b))
}

pub fn run_ga(cfg: &OptimizerConfig, problem: &dyn Problem, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let dim = problem.dimension();
    let rate = cfg.mutation_rate.unwrap_or(1.0 / dim as f64);
    let root = RngStream::new(seed);
    let mut init_rng = root.substream("init");
    let mut select_rng = root.substream("selection");
    let mut cross_rng = root.substream("crossover");
    let mut mut_rng = root.substream("mutation");

    let mut pop = init_population(cfg.population, dim, &mut init_rng)?;
    pop.evaluate_all(problem)?;
    let mut tracker = Tracker::new(problem);
    tracker.observe(pop.members());
    tracker.end_generation(0);

    let mut generation = 0;
    while tracker.evals < cfg.evals && !tracker.reached() {
        generation += 1;
        let fitness: Vec<f64> = pop
            .members()
            .iter()
            .enumerate()
            .map(|(i, g)| g.fitness_at(i))
            .collect::<Result<_>>()?;
        let elite = pop.best().cloned().ok_or(Error::Unevaluated(0))?;
        let mut children = Vec::with_capacity(cfg.population + 1);
        while children.len() < cfg.population {
            let p1 = pop.members()
                [tournament_index(&fitness, cfg.tournament_size, &mut select_rng)]
            .bits();
            let p2 = pop.members()
                [tournament_index(&fitness, cfg.tournament_size, &mut select_rng)]
            .bits();
            let (mut c1, mut c2) = if cross_rng.random_bool(cfg.crossover_prob) {
                let (a, b) = cut_points(dim, &mut cross_rng);
                two_point_crossover(p1, p2, a, b)?
            } else {
                (p1.to_vec(), p2.to_vec())
            };
            mutate(&mut c1, rate, &mut mut_rng);
            mutate(&mut c2, rate, &mut mut_rng);
            children.push(Genotype::new(c1));
            children.push(Genotype::new(c2));
        }
        children.truncate(cfg.population);
        evaluate_all(problem, &mut children)?;
        tracker.evals += children.len();
        tracker.observe(&children);

        let mut next = Population::new(children)?;
        let best_child = next
            .best()
            .and_then(Genotype::fitness)
            .unwrap_or(f64::NEG_INFINITY);
        if best_child < elite.fitness().unwrap_or(f64::NEG_INFINITY) {
            let worst = next
                .members()
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    a.fitness()
                        .unwrap_or(f64::NEG_INFINITY)
                        .total_cmp(&b.fitness().unwrap_or(f64::NEG_INFINITY))
                })
                .map(|(i, _)| i)
                .expect("population is non-empty");
            next.replace(worst, elite)?;
        }
        next.generation = generation;
        pop = next;
        tracker.end_generation(generation);
    }
    Ok(tracker.finish(cfg, problem, seed, pop, None, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::Algorithm;
    use crate::problems::{Hiff, OneMax};
    use proptest::prelude::*;

    #[test]
    fn crossover_example() {
        let (c1, c2) = two_point_crossover(&[false; 6], &[true; 6], 2, 4).unwrap();
        assert_eq!(Genotype::new(c1).to_bitstring(), "001100");
        assert_eq!(Genotype::new(c2).to_bitstring(), "110011");
        assert!(two_point_crossover(&[false; 6], &[true; 6], 4, 2).is_err());
        assert!(two_point_crossover(&[false; 6], &[true; 5], 1, 2).is_err());
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = RngStream::new(1);
        let mut bits = vec![false; 50];
        mutate(&mut bits, 0.0, &mut rng);
        assert!(bits.iter().all(|b| !b));
        mutate(&mut bits, 1.0, &mut rng);
        assert!(bits.iter().all(|&b| b));
    }

    #[test]
    fn elitism_keeps_history_and_population_best_monotone() {
        let cfg = OptimizerConfig {
            algorithm: Algorithm::Ga,
            population: 30,
            evals: 3000,
            mutation_rate: Some(0.3),
            ..Default::default()
        };
        let r = run_ga(&cfg, &Hiff::new(32).unwrap(), 11).unwrap();
        assert!(r
            .history
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness));
        assert_eq!(
            r.final_population.best().unwrap().fitness(),
            Some(r.best_fitness())
        );
        assert_eq!(r.evals_used, 30 * r.generations());
    }

    #[test]
    fn ga_solves_onemax() {
        let cfg = OptimizerConfig {
            algorithm: Algorithm::Ga,
            population: 50,
            evals: 20_000,
            ..Default::default()
        };
        let r = run_ga(&cfg, &OneMax::new(30), 2).unwrap();
        assert!(r.success);
    }

    proptest! {
        #[test]
        fn crossover_preserves_loci_multiset(
            bits in proptest::collection::vec(any::<(bool, bool)>(), 1..40),
            a in 0usize..40, b in 0usize..40,
        ) {
            let n = bits.len();
            let (a, b) = (a.min(b).min(n), a.max(b).min(n));
            let p1: Vec<bool> = bits.iter().map(|x| x.0).collect();
            let p2: Vec<bool> = bits.iter().map(|x| x.1).collect();
            let (c1, c2) = two_point_crossover(&p1, &p2, a, b).unwrap();
            for i in 0..n {
                let mut got = [c1[i], c2[i]];
                let mut want = [p1[i], p2[i]];
                got.sort();
                want.sort();
                prop_assert_eq!(got, want);
            }
        }
    }
}
