//! Bayesian optimization algorithm: a fresh Bayesian network over the
//! selected set each generation, built by greedy BIC edge addition.

use rand::Rng;

use super::{evaluate_all, OptimizerConfig, RunRecord, Tracker};
use crate::error::{Error, Result};
use crate::genotype::{Genotype, Population};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::selection::{init_population, rts_replace};

/// A Bayesian network over binary variables with tabular conditionals.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesNet {
    pub dim: usize,
    pub parents: Vec<Vec<usize>>,
    /// A topological order of the variables.
    pub order: Vec<usize>,
    /// `cpt[i][c]` is `P(x_i = 1)` given parent configuration `c`, where bit
    /// `k` of `c` is the value of `parents[i][k]`.
    pub cpt: Vec<Vec<f64>>,
}

impl BayesNet {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        let mut x = vec![false; self.dim];
        for &i in &self.order {
            let c = config(&x, &self.parents[i]);
            x[i] = rng.random::<f64>() < self.cpt[i][c];
        }
        Genotype::new(x)
    }
}

fn config(x: &[bool], parents: &[usize]) -> usize {
    parents
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &p)| acc | ((x[p] as usize) << k))
}

fn counts(data: &[Vec<bool>], i: usize, parents: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut total = vec![0usize; 1 << parents.len()];
    let mut ones = vec![0usize; 1 << parents.len()];
    for row in data {
        let c = config(row, parents);
        total[c] += 1;
        ones[c] += row[i] as usize;
    }
    (total, ones)
}

/// BIC contribution of variable `i` with the given parents: maximized
/// log-likelihood minus `0.5 ln N` per free parameter.
pub fn node_score(data: &[Vec<bool>], i: usize, parents: &[usize]) -> f64 {
    let (total, ones) = counts(data, i, parents);
    let mut ll = 0.0;
    for (&n, &n1) in total.iter().zip(&ones) {
        for k in [n1, n - n1] {
            if k > 0 {
                ll += k as f64 * (k as f64 / n as f64).ln();
            }
        }
    }
    ll - 0.5 * (data.len() as f64).ln() * total.len() as f64
}

fn reaches(children: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = vec![false; children.len()];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(&children[v]);
        }
    }
    false
}

/// Greedily adds the edge with the largest positive score gain until none
/// remains, keeping the graph acyclic and in-degrees at most `max_parents`.
/// Ties go to the lowest `(child, parent)` pair.
pub fn learn_network(data: &[Vec<bool>], max_parents: usize) -> Result<BayesNet> {
    let dim = data
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Config("empty BOA training set".into()))?;
    for row in data {
        Error::check_dim(dim, row.len())?;
    }
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); dim];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); dim];
    let mut score: Vec<f64> = (0..dim).map(|i| node_score(data, i, &[])).collect();
    let row_gains = |i: usize, parents: &[Vec<usize>], base: f64| -> Vec<f64> {
        (0..dim)
            .map(|j| {
                if j == i || parents[i].contains(&j) || parents[i].len() >= max_parents {
                    f64::NEG_INFINITY
                } else {
                    let mut ps = parents[i].clone();
                    ps.push(j);
                    node_score(data, i, &ps) - base
                }
            })
            .collect()
    };
    let mut gains: Vec<Vec<f64>> = (0..dim).map(|i| row_gains(i, &parents, score[i])).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, row) in gains.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g > 0.0 && best.is_none_or(|(bg, _, _)| g > bg) && !reaches(&children, i, j) {
                    best = Some((g, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        parents[i].push(j);
        children[j].push(i);
        score[i] = node_score(data, i, &parents[i]);
        gains[i] = row_gains(i, &parents, score[i]);
    }

    let order = topological_order(&parents, &children);
    let cpt = (0..dim).map(|i| fit_cpt(data, i, &parents[i])).collect();
    Ok(BayesNet {
        dim,
        parents,
        order,
        cpt,
    })
}

/// Maximum-likelihood conditional table of variable `i`. A parent
/// configuration absent from `data` falls back to the marginal of `i`.
pub fn fit_cpt(data: &[Vec<bool>], i: usize, parents: &[usize]) -> Vec<f64> {
    let (total, ones) = counts(data, i, parents);
    let marginal = ones.iter().sum::<usize>() as f64 / data.len() as f64;
    total
        .iter()
        .zip(&ones)
        .map(|(&n, &n1)| {
            if n == 0 {
                marginal
            } else {
                n1 as f64 / n as f64
            }
        })
        .collect()
}

fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Vec<usize> {
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> =
        (0..parents.len()).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    order
}

/// The fittest `ceil(fraction * len)` members, duplicates kept.
fn truncation_select(pop: &[Genotype], fraction: f64) -> Vec<Vec<bool>> {
    let keep = ((fraction * pop.len() as f64).ceil() as usize).max(1);
    let mut sorted: Vec<&Genotype> = pop.iter().collect();
    let key = |g: &Genotype| g.fitness().unwrap_or(f64::NEG_INFINITY);
    sorted.sort_by(|a, b| key(b).total_cmp(&key(a)));
    sorted
        .into_iter()
        .take(keep)
        .map(|g| g.bits().to_vec())
        .collect()
}

pub fn run_boa(cfg: &OptimizerConfig, problem: &dyn Problem, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let dim = problem.dimension();
    let root = RngStream::new(seed);
    let mut init_rng = root.substream("init");
    let mut sample_rng = root.substream("sampling");
    let mut niche_rng = root.substream("niching");

    let mut pop = init_population(cfg.population, dim, &mut init_rng)?;
    pop.evaluate_all(problem)?;
    let mut tracker = Tracker::new(problem);
    tracker.observe(pop.members());
    tracker.end_generation(0);

    let mut generation = 0;
    while tracker.evals < cfg.evals && !tracker.reached() {
        generation += 1;
        let selected = truncation_select(pop.members(), cfg.training_fraction);
        let net = learn_network(&selected, cfg.boa_max_parents)?;
        let mut offspring: Vec<Genotype> = (0..cfg.population)
            .map(|_| net.sample(&mut sample_rng))
            .collect();
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
    Ok(tracker.finish(cfg, problem, seed, pop, None, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::nade::index_bits;
    use crate::optimizers::Algorithm;
    use crate::problems::{OneMax, RoyalRoad, RoyalRoadSpec};
    use rand::seq::SliceRandom;

    /// Every pattern of `{0,1}^d` repeated `reps` times, shuffled: columns are
    /// exactly independent and uniform.
    fn factorial(d: usize, reps: usize, rng: &mut RngStream) -> Vec<Vec<bool>> {
        let mut rows: Vec<Vec<bool>> = (0..reps)
            .flat_map(|_| (0..1usize << d).map(|c| index_bits(c, d)))
            .collect();
        rows.shuffle(rng);
        rows
    }

    #[test]
    fn independent_columns_give_edgeless_network() {
        for seed in 0..10 {
            let mut rng = RngStream::new(seed);
            let d = rng.random_range(3..=8);
            let data = factorial(d, rng.random_range(1..4), &mut rng);
            let net = learn_network(&data, 2).unwrap();
            assert!(net.edges().is_empty(), "seed {seed}: {:?}", net.edges());
        }
    }

    #[test]
    fn copied_pairs_are_linked() {
        let mut rng = RngStream::new(3);
        let data: Vec<Vec<bool>> = factorial(3, 4, &mut rng)
            .into_iter()
            .map(|r| r.iter().flat_map(|&b| [b, b]).collect())
            .collect();
        let net = learn_network(&data, 2).unwrap();
        let edges = net.edges();
        assert_eq!(edges.len(), 3, "{edges:?}");
        for (a, b) in edges {
            assert_eq!(a / 2, b / 2);
        }
    }

    #[test]
    fn respects_parent_limit_and_acyclicity() {
        let mut rng = RngStream::new(8);
        // x0 drives every other variable
        let data: Vec<Vec<bool>> = (0..400)
            .map(|_| {
                let b: bool = rng.random();
                (0..6)
                    .map(|k| if k == 0 { b } else { b ^ rng.random_bool(0.05) })
                    .collect()
            })
            .collect();
        for max in 0..=3 {
            let net = learn_network(&data, max).unwrap();
            assert!(net.parents.iter().all(|p| p.len() <= max));
            assert_eq!(net.order.len(), 6);
            let pos: Vec<usize> = (0..6)
                .map(|v| net.order.iter().position(|&o| o == v).unwrap())
                .collect();
            for (p, c) in net.edges() {
                assert!(pos[p] < pos[c]);
            }
        }
    }

    #[test]
    fn edgeless_sampling_matches_marginals() {
        let mut rng = RngStream::new(2);
        let data: Vec<Vec<bool>> = (0..200)
            .map(|_| {
                (0..5)
                    .map(|k| rng.random_bool(0.15 + 0.15 * k as f64))
                    .collect()
            })
            .collect();
        let net = BayesNet {
            dim: 5,
            parents: vec![Vec::new(); 5],
            order: (0..5).collect(),
            cpt: (0..5)
                .map(|i| vec![data.iter().filter(|r| r[i]).count() as f64 / 200.0])
                .collect(),
        };
        let n = 10_000;
        let mut freq = [0usize; 5];
        for _ in 0..n {
            for (f, b) in freq.iter_mut().zip(net.sample(&mut rng).bits()) {
                *f += *b as usize;
            }
        }
        for (f, cpt) in freq.iter().zip(&net.cpt) {
            assert!((*f as f64 / n as f64 - cpt[0]).abs() <= 0.02);
        }
    }

    #[test]
    fn unseen_parent_configuration_uses_marginal() {
        let rows = ["010", "000", "011", "011"];
        let data: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        assert_eq!(fit_cpt(&data, 1, &[0, 2]), vec![0.5, 0.75, 1.0, 0.75]);
    }

    #[test]
    fn solves_onemax_and_accounts() {
        let cfg = OptimizerConfig {
            algorithm: Algorithm::Boa,
            population: 200,
            evals: 20_000,
            niching: true,
            ..Default::default()
        };
        let r = run_boa(&cfg, &OneMax::new(20), 4).unwrap();
        assert!(r.success, "{:?}", r.history.last());
        assert_eq!(r.evals_used, 200 * r.generations());
        assert!(r
            .history
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness));
        let cfg = OptimizerConfig {
            niching: false,
            population: 60,
            evals: 600,
            ..cfg
        };
        let r = run_boa(&cfg, &RoyalRoad::new(RoyalRoadSpec::new(16, 4).unwrap()), 4).unwrap();
        assert_eq!(r.evals_used, 600);
        assert_eq!(r.final_population.len(), 60);
    }
}
