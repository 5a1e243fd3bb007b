//! Benchmark objective functions.
//!
//! Every problem maps a bit vector to a scalar fitness to be maximised. Bit
//! `i` of a genotype is locus `i`; for MaxSat it is the truth value of
//! variable `i + 1`.

mod hiff;
mod knapsack;
mod maxsat;
mod royal_road;

use std::sync::Arc;

pub use hiff::{eval_hiff, Hiff};
pub use knapsack::{
    eval_knapsack, gen_random_knapsack, greedy_knapsack, Knapsack, KnapsackInstance,
};
pub use maxsat::{eval_maxsat, parse_dimacs, CnfFormula, MaxSat};
pub use royal_road::{
    eval_royal_road, eval_rr_linkages, RoyalRoad, RoyalRoadSpec, RrLinkSpec, RrLinkages,
};

use crate::error::{Error, Result};
use crate::genotype::Genotype;

/// An objective over fixed-length bit vectors.
pub trait Problem: Send + Sync {
    fn name(&self) -> String;

    fn dimension(&self) -> usize;

    /// Fitness of `bits`; fails with a dimension error on a length mismatch.
    fn evaluate(&self, bits: &[bool]) -> Result<f64>;

    /// The known global optimum, when one is registered.
    fn optimum(&self) -> Option<f64> {
        None
    }

    /// Whether the neural optimizers should see this problem through a
    /// random bit mask. True for problems whose optimum is the all-ones
    /// string.
    fn maskable(&self) -> bool {
        false
    }
}

impl<P: Problem + ?Sized> Problem for Arc<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        (**self).evaluate(bits)
    }
    fn optimum(&self) -> Option<f64> {
        (**self).optimum()
    }
    fn maskable(&self) -> bool {
        (**self).maskable()
    }
}

/// Number of ones. A smoke-test problem that any working optimizer solves.
#[derive(Clone, Debug)]
pub struct OneMax {
    len: usize,
}

impl OneMax {
    pub fn new(len: usize) -> Self {
        Self { len }
    }
}

impl Problem for OneMax {
    fn name(&self) -> String {
        format!("onemax-{}", self.len)
    }
    fn dimension(&self) -> usize {
        self.len
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        Error::check_dim(self.len, bits.len())?;
        Ok(bits.iter().filter(|&&b| b).count() as f64)
    }
    fn optimum(&self) -> Option<f64> {
        Some(self.len as f64)
    }
    fn maskable(&self) -> bool {
        true
    }
}

/// Evaluates `inner` on `bits XOR mask`. The mask is fixed for a trial.
#[derive(Clone)]
pub struct MaskedProblem {
    inner: Arc<dyn Problem>,
    mask: Genotype,
}

impl MaskedProblem {
    pub fn new(inner: Arc<dyn Problem>, mask: Genotype) -> Result<Self> {
        Error::check_dim(inner.dimension(), mask.len())?;
        Ok(Self { inner, mask })
    }

    pub fn mask(&self) -> &Genotype {
        &self.mask
    }

    pub fn inner(&self) -> &Arc<dyn Problem> {
        &self.inner
    }

    /// Maps a genotype from the masked search space to the inner problem's
    /// space (the operation is its own inverse).
    pub fn unmask(&self, g: &Genotype) -> Result<Genotype> {
        g.xor(&self.mask)
    }
}

/// Inner fitness of `g XOR mask`.
pub fn apply_mask(p: &MaskedProblem, g: &Genotype) -> Result<f64> {
    p.evaluate(g.bits())
}

impl Problem for MaskedProblem {
    fn name(&self) -> String {
        format!("{}+mask", self.inner.name())
    }
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        Error::check_dim(self.mask.len(), bits.len())?;
        let flipped: Vec<bool> = bits
            .iter()
            .zip(self.mask.bits())
            .map(|(a, m)| a ^ m)
            .collect();
        self.inner.evaluate(&flipped)
    }
    fn optimum(&self) -> Option<f64> {
        self.inner.optimum()
    }
}
