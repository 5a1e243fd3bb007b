//! Fixed-length bit-vector genotypes and populations.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::Problem;

/// A fixed-length bit vector with an optional cached fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Genotype {
    bits: Vec<bool>,
    fitness: Option<f64>,
}

impl Genotype {
    pub fn new(bits: Vec<bool>) -> Self {
        Self {
            bits,
            fitness: None,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self::new(vec![true; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::new((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("invalid bit {other:?} at position {i}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn to_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    /// Returns the cached fitness or [`Error::Unevaluated`] tagged with `index`.
    pub fn fitness_at(&self, index: usize) -> Result<f64> {
        self.fitness.ok_or(Error::Unevaluated(index))
    }

    pub fn with_fitness(mut self, fitness: f64) -> Self {
        self.fitness = Some(fitness);
        self
    }

    /// Evaluates against `problem` and caches the result.
    pub fn evaluate(&mut self, problem: &dyn Problem) -> Result<f64> {
        let f = problem.evaluate(&self.bits)?;
        self.fitness = Some(f);
        Ok(f)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &Genotype) -> Result<Genotype> {
        Error::check_dim(self.len(), other.len())?;
        Ok(Genotype::new(
            self.bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        ))
    }
}

impl From<Vec<bool>> for Genotype {
    fn from(bits: Vec<bool>) -> Self {
        Self::new(bits)
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &Genotype, b: &Genotype) -> Result<usize> {
    Error::check_dim(a.len(), b.len())?;
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}

/// An ordered collection of equal-length genotypes.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Genotype>,
    pub generation: usize,
}

impl Population {
    pub fn new(members: Vec<Genotype>) -> Result<Self> {
        if let Some(first) = members.first() {
            let dim = first.len();
            if let Some(bad) = members.iter().find(|g| g.len() != dim) {
                return Err(Error::Dimension {
                    expected: dim,
                    got: bad.len(),
                });
            }
        }
        Ok(Self {
            members,
            generation: 0,
        })
    }

    pub fn members(&self) -> &[Genotype] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Genotype> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.members.first().map_or(0, Genotype::len)
    }

    pub fn get(&self, index: usize) -> Option<&Genotype> {
        self.members.get(index)
    }

    /// Replaces member `index`; the replacement must share the dimension.
    pub fn replace(&mut self, index: usize, g: Genotype) -> Result<()> {
        Error::check_dim(self.dimension(), g.len())?;
        self.members[index] = g;
        Ok(())
    }

    pub fn evaluate_all(&mut self, problem: &dyn Problem) -> Result<()> {
        for g in &mut self.members {
            g.evaluate(problem)?;
        }
        Ok(())
    }

    /// Fittest evaluated member; ties resolve to the lowest index.
    pub fn best(&self) -> Option<&Genotype> {
        let mut best: Option<&Genotype> = None;
        for g in &self.members {
            if let Some(f) = g.fitness() {
                if best.and_then(Genotype::fitness).is_none_or(|bf| f > bf) {
                    best = Some(g);
                }
            }
        }
        best
    }

    pub fn contains_bits(&self, bits: &[bool]) -> bool {
        self.members.iter().any(|g| g.bits() == bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> Genotype {
        Genotype::from_bitstring(s).unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&g("0000"), &g("0000")).unwrap(), 0);
        assert_eq!(hamming_distance(&g("1010"), &g("0101")).unwrap(), 4);
        assert_eq!(hamming_distance(&g("10110"), &g("10011")).unwrap(), 2);
    }

    #[test]
    fn hamming_length_mismatch() {
        let err = hamming_distance(&g("01"), &g("011")).unwrap_err();
        assert!(matches!(
            err,
            Error::Dimension {
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn bitstring_round_trip_and_rejects_junk() {
        assert_eq!(g("0110").to_bitstring(), "0110");
        assert!(Genotype::from_bitstring("01x").is_err());
    }

    #[test]
    fn population_rejects_mixed_dimensions() {
        assert!(Population::new(vec![g("01"), g("011")]).is_err());
    }

    fn triple(len: usize) -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<bool>)> {
        (
            prop::collection::vec(any::<bool>(), len),
            prop::collection::vec(any::<bool>(), len),
            prop::collection::vec(any::<bool>(), len),
        )
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric((a, b, c) in (1usize..64).prop_flat_map(triple)) {
            let (a, b, c) = (Genotype::new(a), Genotype::new(b), Genotype::new(c));
            let ab = hamming_distance(&a, &b).unwrap();
            let ba = hamming_distance(&b, &a).unwrap();
            let bc = hamming_distance(&b, &c).unwrap();
            let ac = hamming_distance(&a, &c).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc);
            prop_assert_eq!(ab == 0, a.bits() == b.bits());
        }
    }
}
