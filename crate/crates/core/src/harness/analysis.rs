use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::models::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    AllOnes,
    AllZeros,
}

impl Predicate {
    pub fn holds(&self, bits: &[bool], indices: &[usize]) -> bool {
        let want = matches!(self, Predicate::AllOnes);
        indices.iter().all(|&i| bits[i] == want)
    }
}

/// A set of loci with the predicate that makes its indicator 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub indices: Vec<usize>,
    pub predicate: Predicate,
}

impl Group {
    pub fn ones(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            indices: indices.into_iter().collect(),
            predicate: Predicate::AllOnes,
        }
    }

    pub fn zeros(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            indices: indices.into_iter().collect(),
            predicate: Predicate::AllZeros,
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::Config("empty group".into()));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i >= dim) {
            return Err(Error::Config(format!(
                "group index {i} out of range for dimension {dim}"
            )));
        }
        Ok(())
    }
}

/// Parses `ones:0-3`, `zeros:4,6,8-9` or a bare index list (all ones).
impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (predicate, list) = match s.split_once(':') {
            Some(("ones", rest)) => (Predicate::AllOnes, rest),
            Some(("zeros", rest)) => (Predicate::AllZeros, rest),
            Some((p, _)) => return Err(Error::Config(format!("unknown group predicate {p:?}"))),
            None => (Predicate::AllOnes, s),
        };
        Ok(Group {
            indices: parse_indices(list)?,
            predicate,
        })
    }
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad index {s:?}")))
}

fn parse_indices(list: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse_index(a)?, parse_index(b)?);
                if a > b {
                    return Err(Error::Config(format!("descending range {part:?}")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_index(part)?),
        }
    }
    Ok(out)
}

/// Parses a clamp such as `0-3=1,7=0` into a partial assignment over `dim`
/// loci.
pub fn parse_clamp(spec: &str, dim: usize) -> Result<Vec<Option<bool>>> {
    let mut clamp = vec![None; dim];
    for part in spec.split(';').flat_map(|p| p.split_whitespace()) {
        let (idx, val) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("clamp term {part:?} lacks '='")))?;
        let v = match val.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Config(format!(
                    "clamp value {other:?} is not 0 or 1"
                )))
            }
        };
        for i in parse_indices(idx)? {
            *clamp.get_mut(i).ok_or_else(|| {
                Error::Config(format!("clamp index {i} out of range for dimension {dim}"))
            })? = Some(v);
        }
    }
    Ok(clamp)
}

/// Indicator matrix: `out[s][g]` is whether sample `s` satisfies group `g`.
pub fn indicators(samples: &[Genotype], groups: &[Group]) -> Result<Vec<Vec<bool>>> {
    let dim = samples.first().map_or(0, Genotype::len);
    for g in groups {
        g.check(dim)?;
    }
    samples
        .iter()
        .map(|s| {
            Error::check_dim(dim, s.len())?;
            Ok(groups
                .iter()
                .map(|g| g.predicate.holds(s.bits(), &g.indices))
                .collect())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceReport {
    /// Mean of each group indicator.
    pub means: Vec<f64>,
    /// Population (1/n) covariance between indicators.
    pub cov: Vec<Vec<f64>>,
}

/// Covariance matrix of the group indicators over `samples`.
pub fn analyze_covariance(samples: &[Genotype], groups: &[Group]) -> Result<CovarianceReport> {
    if samples.len() < 2 {
        return Err(Error::Config("covariance needs at least 2 samples".into()));
    }
    if groups.is_empty() {
        return Err(Error::Config("covariance needs at least one group".into()));
    }
    let ind = indicators(samples, groups)?;
    let n = samples.len() as f64;
    let k = groups.len();
    let means: Vec<f64> = (0..k)
        .map(|g| ind.iter().filter(|r| r[g]).count() as f64 / n)
        .collect();
    let mut cov = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let both = ind.iter().filter(|r| r[a] && r[b]).count() as f64 / n;
            cov[a][b] = both - means[a] * means[b];
            cov[b][a] = cov[a][b];
        }
    }
    Ok(CovarianceReport { means, cov })
}

fn pack(g: &Genotype) -> Vec<u64> {
    g.bits()
        .chunks(64)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u64, |w, (i, &b)| w | ((b as u64) << i))
        })
        .collect()
}

/// For every sample, the mean Hamming distance to its `k` nearest other
/// samples (lower index first among equal distances).
pub fn analyze_diversity(samples: &[Genotype], k: usize) -> Result<Vec<f64>> {
    if k == 0 || samples.len() <= k {
        return Err(Error::Config(format!(
            "diversity needs more than k = {k} samples and k >= 1, got {}",
            samples.len()
        )));
    }
    let dim = samples[0].len();
    for s in samples {
        Error::check_dim(dim, s.len())?;
    }
    let packed: Vec<Vec<u64>> = samples.iter().map(pack).collect();
    let mut dists: Vec<(u32, usize)> = Vec::with_capacity(samples.len());
    Ok(packed
        .iter()
        .enumerate()
        .map(|(i, a)| {
            dists.clear();
            dists.extend(
                packed
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, b)| {
                        (
                            a.iter()
                                .zip(b)
                                .map(|(x, y)| (x ^ y).count_ones())
                                .sum::<u32>(),
                            j,
                        )
                    }),
            );
            dists.select_nth_unstable(k - 1);
            dists[..k].iter().map(|&(d, _)| d as f64).sum::<f64>() / k as f64
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClampReport {
    /// Fraction of samples with a 1 at each locus.
    pub locus_means: Vec<f64>,
    /// Fraction of samples satisfying each group.
    pub group_freqs: Vec<f64>,
}

/// Draws `n` samples from `model` under `clamp`. A dA takes its inputs from
/// `inputs` in rotation, or uniform random inputs when none are given.
pub fn clamp_study<R: Rng + ?Sized>(
    model: &Model,
    clamp: &[Option<bool>],
    n: usize,
    groups: &[Group],
    inputs: Option<&[Genotype]>,
    rng: &mut R,
) -> Result<ClampReport> {
    let dim = model.dim();
    if clamp.len() != dim {
        return Err(Error::Config(format!(
            "clamp covers {} loci, model has {dim}",
            clamp.len()
        )));
    }
    if n == 0 {
        return Err(Error::Config(
            "clamp study needs at least one sample".into(),
        ));
    }
    for g in groups {
        g.check(dim)?;
    }
    let inputs = inputs.filter(|i| !i.is_empty());
    let mut ones = vec![0usize; dim];
    let mut hits = vec![0usize; groups.len()];
    for s in 0..n {
        let input = inputs.map(|i| i[s % i.len()].bits());
        let g = model.sample(input, Some(clamp), rng)?;
        for (o, &b) in ones.iter_mut().zip(g.bits()) {
            *o += b as usize;
        }
        for (h, grp) in hits.iter_mut().zip(groups) {
            *h += grp.predicate.holds(g.bits(), &grp.indices) as usize;
        }
    }
    let nf = n as f64;
    Ok(ClampReport {
        locus_means: ones.iter().map(|&o| o as f64 / nf).collect(),
        group_freqs: hits.iter().map(|&h| h as f64 / nf).collect(),
    })
}

/// A row of `samples.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRow {
    pub genotype: Genotype,
}

/// Writes `index,bits,fitness`; fitness is left empty for unevaluated rows.
pub fn write_samples(path: &Path, samples: &[Genotype]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "bits", "fitness"])?;
    for (i, g) in samples.iter().enumerate() {
        w.write_record([
            i.to_string(),
            g.to_bitstring(),
            g.fitness().map_or(String::new(), super::fmt_g),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `samples.csv` written by [`write_samples`].
pub fn read_samples(path: &Path) -> Result<Vec<Genotype>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let bits_col = col("bits")
        .ok_or_else(|| Error::Config(format!("{} has no bits column", path.display())))?;
    let fit_col = col("fitness");
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut g = Genotype::from_bitstring(&rec[bits_col]).map_err(|e| Error::Parse {
            line: line + 2,
            message: e.to_string(),
        })?;
        if let Some(f) = fit_col.map(|c| &rec[c]).filter(|f| !f.is_empty()) {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: line + 2,
                message: format!("bad fitness {f:?}"),
            })?;
            g = g.with_fitness(v);
        }
        out.push(g);
    }
    Ok(out)
}
