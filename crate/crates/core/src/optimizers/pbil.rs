//! Population-based incremental learning with probability-vector mutation.

use rand::Rng;

use super::{evaluate_all, OptimizerConfig, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::genotype::{Genotype, Population};
use crate::problems::Problem;
use crate::rng::RngStream;

const P_MIN: f64 = 0.01;
const P_MAX: f64 = 0.99;

/// PBIL state: one marginal probability per locus.
#[derive(Clone, Debug, PartialEq)]
pub struct Pbil {
    pub probs: Vec<f64>,
    pub rate: f64,
    pub mutation_prob: f64,
    pub mutation_shift: f64,
}

impl Pbil {
    pub fn new(dim: usize, rate: f64, mutation_prob: f64, mutation_shift: f64) -> Self {
        Self {
            probs: vec![0.5; dim],
            rate,
            mutation_prob,
            mutation_shift,
        }
    }

    pub fn from_config(dim: usize, cfg: &OptimizerConfig) -> Self {
        Self::new(
            dim,
            cfg.pbil_rate,
            cfg.pbil_mutation_prob,
            cfg.pbil_mutation_shift,
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype::new(
            self.probs
                .iter()
                .map(|&p| rng.random::<f64>() < p)
                .collect(),
        )
    }

    /// Moves every probability toward `best` by the learning rate.
    pub fn learn(&mut self, best: &[bool]) -> Result<()> {
        Error::check_dim(self.probs.len(), best.len())?;
        for (p, &b) in self.probs.iter_mut().zip(best) {
            *p = *p * (1.0 - self.rate) + if b { self.rate } else { 0.0 };
        }
        Ok(())
    }

    /// With probability `mutation_prob` per locus, shifts the probability
    /// toward a random bit; then clamps to `[0.01, 0.99]`.
    pub fn mutate<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for p in &mut self.probs {
            if rng.random_bool(self.mutation_prob) {
                let target = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
                *p = *p * (1.0 - self.mutation_shift) + target * self.mutation_shift;
            }
            *p = p.clamp(P_MIN, P_MAX);
        }
    }

    /// One iteration: sample, evaluate, learn from the best, mutate.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        problem: &dyn Problem,
        count: usize,
        sample_rng: &mut R,
        mutate_rng: &mut R,
    ) -> Result<Vec<Genotype>> {
        let mut samples: Vec<Genotype> = (0..count).map(|_| self.sample(sample_rng)).collect();
        evaluate_all(problem, &mut samples)?;
        let pop = Population::new(samples)?;
        let best = pop.best().ok_or(Error::Unevaluated(0))?.bits().to_vec();
        self.learn(&best)?;
        self.mutate(mutate_rng);
        Ok(pop.into_members())
    }
}

pub fn run_pbil(cfg: &OptimizerConfig, problem: &dyn Problem, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let dim = problem.dimension();
    let root = RngStream::new(seed);
    let mut sample_rng = root.substream("sampling");
    let mut mutate_rng = root.substream("mutation");
    let mut pbil = Pbil::from_config(dim, cfg);
    let mut tracker = Tracker::new(problem);

    let mut generation = 0;
    let mut last = Vec::new();
    while tracker.evals < cfg.evals && !tracker.reached() {
        generation += 1;
        last = pbil.step(problem, cfg.population, &mut sample_rng, &mut mutate_rng)?;
        tracker.evals += last.len();
        tracker.observe(&last);
        tracker.end_generation(generation);
    }
    let mut pop = Population::new(last)?;
    pop.generation = generation;
    Ok(tracker.finish(cfg, problem, seed, pop, None, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::Algorithm;
    use crate::problems::OneMax;

    #[test]
    fn learning_step_example() {
        let mut p = Pbil::new(1, 0.1, 0.0, 0.0);
        p.learn(&[true]).unwrap();
        assert!((p.probs[0] - 0.55).abs() < 1e-12);
        let mut q = Pbil::new(3, 0.0, 0.0, 0.0);
        q.probs = vec![0.2, 0.5, 0.9];
        q.learn(&[true, false, true]).unwrap();
        assert_eq!(q.probs, vec![0.2, 0.5, 0.9]);
    }

    #[test]
    fn mutation_clamps() {
        let mut p = Pbil::new(4, 0.1, 1.0, 0.05);
        p.probs = vec![0.0, 1.0, 0.005, 0.999];
        p.mutate(&mut RngStream::new(1));
        assert!(p.probs.iter().all(|&x| (P_MIN..=P_MAX).contains(&x)));
    }

    #[test]
    fn converges_on_onemax() {
        let mut p = Pbil::new(20, 0.1, 0.02, 0.05);
        let root = RngStream::new(5);
        let (mut s, mut m) = (root.substream("s"), root.substream("m"));
        for _ in 0..200 {
            p.step(&OneMax::new(20), 50, &mut s, &mut m).unwrap();
        }
        assert!(p.probs.iter().all(|&x| x >= 0.9), "{:?}", p.probs);
    }

    #[test]
    fn run_accounting() {
        let cfg = OptimizerConfig {
            algorithm: Algorithm::Pbil,
            population: 20,
            evals: 205,
            ..Default::default()
        };
        let r = run_pbil(&cfg, &OneMax::new(64), 3).unwrap();
        assert_eq!(r.generations(), 11);
        assert_eq!(r.evals_used, 220);
        assert_eq!(r.final_population.len(), 20);
    }
}
