use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;

/// Royal Road layout: contiguous all-ones blocks, each worth its size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoyalRoadSpec {
    pub length: usize,
    pub block: usize,
}

impl RoyalRoadSpec {
    pub fn new(length: usize, block: usize) -> Result<Self> {
        if block == 0 || length == 0 || !length.is_multiple_of(block) {
            return Err(Error::InvalidDimension(format!(
                "royal road length {length} not divisible into blocks of {block}"
            )));
        }
        Ok(Self { length, block })
    }
}

/// Sum of `block` over every block that is entirely ones.
pub fn eval_royal_road(bits: &[bool], spec: &RoyalRoadSpec) -> Result<f64> {
    Error::check_dim(spec.length, bits.len())?;
    let complete = bits
        .chunks_exact(spec.block)
        .filter(|c| c.iter().all(|&b| b))
        .count();
    Ok((complete * spec.block) as f64)
}

#[derive(Clone, Debug)]
pub struct RoyalRoad {
    spec: RoyalRoadSpec,
}

impl RoyalRoad {
    pub fn new(spec: RoyalRoadSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &RoyalRoadSpec {
        &self.spec
    }
}

impl Problem for RoyalRoad {
    fn name(&self) -> String {
        format!(
            "royal-road-{}x{}",
            self.spec.length / self.spec.block,
            self.spec.block
        )
    }
    fn dimension(&self) -> usize {
        self.spec.length
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        eval_royal_road(bits, &self.spec)
    }
    fn optimum(&self) -> Option<f64> {
        Some(self.spec.length as f64)
    }
    fn maskable(&self) -> bool {
        true
    }
}

/// Royal Road with linkages: `n` partitions of `2k` bits, each split into a
/// left and right half of `k` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrLinkSpec {
    pub k: usize,
    pub n: usize,
}

impl RrLinkSpec {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 1 || n < 2 {
            return Err(Error::InvalidDimension(format!(
                "royal road with linkages needs k >= 1 and n >= 2 (got k={k}, n={n})"
            )));
        }
        Ok(Self { k, n })
    }

    pub fn length(&self) -> usize {
        2 * self.k * self.n
    }

    /// Loci of the left half of partition `i` (0-based).
    pub fn left(&self, i: usize) -> std::ops::Range<usize> {
        let start = 2 * self.k * i;
        start..start + self.k
    }

    /// Loci of the right half of partition `i` (0-based).
    pub fn right(&self, i: usize) -> std::ops::Range<usize> {
        let start = 2 * self.k * i + self.k;
        start..start + self.k
    }
}

fn uniform(bits: &[bool]) -> Option<bool> {
    let first = *bits.first()?;
    bits.iter().all(|&b| b == first).then_some(first)
}

/// One point per partition whose halves are each uniform and differ
/// (`1^k 0^k` or `0^k 1^k`), plus one point when the first left half and the
/// last right half are both all ones or both all zeros.
pub fn eval_rr_linkages(bits: &[bool], spec: &RrLinkSpec) -> Result<f64> {
    Error::check_dim(spec.length(), bits.len())?;
    let mut total = 0usize;
    for i in 0..spec.n {
        if let (Some(l), Some(r)) = (uniform(&bits[spec.left(i)]), uniform(&bits[spec.right(i)])) {
            if l != r {
                total += 1;
            }
        }
    }
    if let (Some(first), Some(last)) = (
        uniform(&bits[spec.left(0)]),
        uniform(&bits[spec.right(spec.n - 1)]),
    ) {
        if first == last {
            total += 1;
        }
    }
    Ok(total as f64)
}

#[derive(Clone, Debug)]
pub struct RrLinkages {
    spec: RrLinkSpec,
}

impl RrLinkages {
    pub fn new(spec: RrLinkSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &RrLinkSpec {
        &self.spec
    }
}

impl Problem for RrLinkages {
    fn name(&self) -> String {
        format!("rr-linkages-k{}-n{}", self.spec.k, self.spec.n)
    }
    fn dimension(&self) -> usize {
        self.spec.length()
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        eval_rr_linkages(bits, &self.spec)
    }
    fn optimum(&self) -> Option<f64> {
        Some((self.spec.n + 1) as f64)
    }
    fn maskable(&self) -> bool {
        true
    }
}
