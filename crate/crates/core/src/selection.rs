//! Population initialisation, selection and niching replacement shared by all
//! optimizers.
//!
//! Fitness ties are always resolved deterministically: by first occurrence,
//! first draw or lowest index, so a run is reproducible from its seed.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::genotype::{hamming_distance, Genotype, Population};

/// `size` genotypes with independent Bernoulli(0.5) bits.
pub fn init_population<R: Rng + ?Sized>(
    size: usize,
    dim: usize,
    rng: &mut R,
) -> Result<Population> {
    if size == 0 || dim == 0 {
        return Err(Error::Config(format!(
            "population size and dimension must be positive (got {size}, {dim})"
        )));
    }
    Population::new((0..size).map(|_| Genotype::random(dim, rng)).collect())
}

/// Runs `count` tournaments, each over `tournament_size` uniform draws with
/// replacement. The first-drawn contestant wins ties.
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &[Genotype],
    count: usize,
    tournament_size: usize,
    rng: &mut R,
) -> Result<Vec<Genotype>> {
    if pop.is_empty() {
        return Err(Error::Config("tournament over an empty population".into()));
    }
    if tournament_size == 0 {
        return Err(Error::Config("tournament size must be at least 1".into()));
    }
    let fitness = pop
        .iter()
        .enumerate()
        .map(|(i, g)| g.fitness_at(i))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..count)
        .map(|_| pop[tournament_index(&fitness, tournament_size, rng)].clone())
        .collect())
}

/// Index of the winner of one tournament over `fitness`.
pub fn tournament_index<R: Rng + ?Sized>(
    fitness: &[f64],
    tournament_size: usize,
    rng: &mut R,
) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..tournament_size {
        let challenger = rng.random_range(0..fitness.len());
        if fitness[challenger] > fitness[winner] {
            winner = challenger;
        }
    }
    winner
}

/// The fittest `ceil(fraction * len)` distinct bit patterns of `pop`, sorted by
/// descending fitness. Equal fitness keeps first-occurrence order; an
/// unevaluated member sorts last.
pub fn truncation_select_unique(pop: &[Genotype], fraction: f64) -> Vec<Genotype> {
    let keep = ((fraction * pop.len() as f64).ceil() as usize).max(1);
    let mut seen: HashSet<&[bool]> = HashSet::with_capacity(pop.len());
    let mut unique: Vec<&Genotype> = pop.iter().filter(|g| seen.insert(g.bits())).collect();
    // stable sort keeps first-occurrence order among equal fitness
    unique.sort_by(|a, b| key(b).total_cmp(&key(a)));
    unique.into_iter().take(keep).cloned().collect()
}

fn key(g: &Genotype) -> f64 {
    g.fitness().unwrap_or(f64::NEG_INFINITY)
}

/// Restricted tournament selection.
///
/// Draws `window` members without replacement, finds the one closest in
/// Hamming distance to `candidate` (lowest population index on ties) and
/// replaces it if `candidate` is strictly fitter. Returns the replaced index.
pub fn rts_replace<R: Rng + ?Sized>(
    pop: &mut Population,
    candidate: Genotype,
    window: usize,
    rng: &mut R,
) -> Result<Option<usize>> {
    if window == 0 || window > pop.len() {
        return Err(Error::Config(format!(
            "niching window {window} outside [1, {}]",
            pop.len()
        )));
    }
    let cand_fit = candidate.fitness().ok_or(Error::Unevaluated(usize::MAX))?;
    let mut nearest: Option<(usize, usize)> = None;
    for idx in index::sample(rng, pop.len(), window) {
        let d = hamming_distance(&pop.members()[idx], &candidate)?;
        let better = match nearest {
            None => true,
            Some((bd, bi)) => d < bd || (d == bd && idx < bi),
        };
        if better {
            nearest = Some((d, idx));
        }
    }
    let (_, idx) = nearest.expect("window is non-empty");
    let incumbent = pop.members()[idx].fitness().unwrap_or(f64::NEG_INFINITY);
    if cand_fit > incumbent {
        pop.replace(idx, candidate)?;
        Ok(Some(idx))
    } else {
        Ok(None)
    }
}
