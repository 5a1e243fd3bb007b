use crate::error::{Error, Result};
use crate::problems::Problem;

/// Hierarchical if-and-only-if.
///
/// Every uniform block of size `2^l` aligned at a multiple of `2^l` adds
/// `2^l`, from single bits (`l = 0`) up to the whole string. A block is
/// uniform only if both halves are uniform and agree, so a non-uniform block
/// blocks every level above it.
pub fn eval_hiff(bits: &[bool]) -> Result<f64> {
    if !bits.len().is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "HIFF length must be a power of two, got {}",
            bits.len()
        )));
    }
    let mut level: Vec<Option<bool>> = bits.iter().map(|&b| Some(b)).collect();
    let mut block = 1.0;
    let mut total = level.len() as f64;
    while level.len() > 1 {
        level = level
            .chunks_exact(2)
            .map(|pair| match (pair[0], pair[1]) {
                (Some(a), Some(b)) if a == b => Some(a),
                _ => None,
            })
            .collect();
        block *= 2.0;
        total += block * level.iter().filter(|v| v.is_some()).count() as f64;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct Hiff {
    len: usize,
}

impl Hiff {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidDimension(format!(
                "HIFF length must be a power of two, got {len}"
            )));
        }
        Ok(Self { len })
    }

    /// `(log2(D) + 1) * D`, reached by the all-ones and all-zeros strings.
    pub fn optimum_value(len: usize) -> f64 {
        ((len.trailing_zeros() + 1) as usize * len) as f64
    }
}

impl Problem for Hiff {
    fn name(&self) -> String {
        format!("hiff-{}", self.len)
    }
    fn dimension(&self) -> usize {
        self.len
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        Error::check_dim(self.len, bits.len())?;
        eval_hiff(bits)
    }
    fn optimum(&self) -> Option<f64> {
        Some(Self::optimum_value(self.len))
    }
    fn maskable(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::Genotype;
    use crate::rng::RngStream;

    /// Recursive definition: returns (contribution, uniform value if any).
    fn recursive_oracle(bits: &[bool]) -> (f64, Option<bool>) {
        if bits.len() == 1 {
            return (1.0, Some(bits[0]));
        }
        let (l, r) = bits.split_at(bits.len() / 2);
        let (fl, vl) = recursive_oracle(l);
        let (fr, vr) = recursive_oracle(r);
        let v = match (vl, vr) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        let own = if v.is_some() { bits.len() as f64 } else { 0.0 };
        (fl + fr + own, v)
    }

    fn bits(s: &str) -> Vec<bool> {
        Genotype::from_bitstring(s).unwrap().into_bits()
    }

    #[test]
    fn known_values() {
        assert_eq!(eval_hiff(&[true; 128]).unwrap(), 1024.0);
        assert_eq!(eval_hiff(&[true; 256]).unwrap(), 2304.0);
        assert_eq!(eval_hiff(&bits("00000000")).unwrap(), 32.0);
        assert_eq!(eval_hiff(&bits("00001111")).unwrap(), 24.0);
        assert_eq!(recursive_oracle(&bits("00000000")).0, 32.0);
        assert_eq!(recursive_oracle(&bits("00001111")).0, 24.0);
    }

    #[test]
    fn optimum_formula() {
        for k in 0..10 {
            let d = 1usize << k;
            assert_eq!(Hiff::optimum_value(d), eval_hiff(&vec![true; d]).unwrap());
            assert_eq!(Hiff::optimum_value(d), ((k + 1) * d) as f64);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(eval_hiff(&[true; 6]).is_err());
        assert!(Hiff::new(12).is_err());
        assert!(Hiff::new(8).unwrap().evaluate(&[true; 4]).is_err());
    }

    #[test]
    fn exhaustive_d8_matches_oracle_and_complement_symmetry() {
        for code in 0u32..256 {
            let b: Vec<bool> = (0..8).map(|i| code >> i & 1 == 1).collect();
            let nb: Vec<bool> = b.iter().map(|x| !x).collect();
            let f = eval_hiff(&b).unwrap();
            assert_eq!(f, recursive_oracle(&b).0);
            assert_eq!(f, eval_hiff(&nb).unwrap());
        }
    }

    #[test]
    fn random_d128_complement_symmetry() {
        let mut rng = RngStream::new(21);
        for _ in 0..200 {
            let g = Genotype::random(128, &mut rng);
            let ng: Vec<bool> = g.bits().iter().map(|x| !x).collect();
            assert_eq!(eval_hiff(g.bits()).unwrap(), eval_hiff(&ng).unwrap());
            assert_eq!(eval_hiff(g.bits()).unwrap(), recursive_oracle(g.bits()).0);
        }
    }
}
