//! Multidimensional 0/1 knapsack.
//!
//! Instance text format (whitespace separated decimal integers):
//!
//! ```text
//! N m
//! v_1 ... v_N
//! w_11 ... w_1N      (m rows)
//! ...
//! c_1 ... c_m
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::Problem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub values: Vec<i64>,
    /// One row of `N` weights per constraint.
    pub weights: Vec<Vec<i64>>,
    pub capacities: Vec<i64>,
    pub optimum: Option<i64>,
}

impl KnapsackInstance {
    pub fn new(values: Vec<i64>, weights: Vec<Vec<i64>>, capacities: Vec<i64>) -> Result<Self> {
        let n = values.len();
        if n == 0 || weights.is_empty() {
            return Err(Error::Config(
                "knapsack needs at least one item and one constraint".into(),
            ));
        }
        if weights.len() != capacities.len() {
            return Err(Error::Config(format!(
                "{} weight rows but {} capacities",
                weights.len(),
                capacities.len()
            )));
        }
        if let Some(row) = weights.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: row.len(),
            });
        }
        if values.iter().any(|&v| v <= 0) {
            return Err(Error::Config("knapsack values must be positive".into()));
        }
        if weights.iter().flatten().any(|&w| w < 0) {
            return Err(Error::Config(
                "knapsack weights must be non-negative".into(),
            ));
        }
        Ok(Self {
            values,
            weights,
            capacities,
            optimum: None,
        })
    }

    pub fn with_optimum(mut self, optimum: Option<i64>) -> Self {
        self.optimum = optimum;
        self
    }

    pub fn items(&self) -> usize {
        self.values.len()
    }

    pub fn constraints(&self) -> usize {
        self.weights.len()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)));
        let mut last_line = 1;
        let mut next = |what: &str| -> Result<i64> {
            match tokens.next() {
                Some((line, tok)) => {
                    last_line = line;
                    tok.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("expected integer {what}, found {tok:?}"),
                    })
                }
                None => Err(Error::Parse {
                    line: last_line,
                    message: format!("unexpected end of input reading {what}"),
                }),
            }
        };
        let n = next("item count")?;
        let m = next("constraint count")?;
        if n < 1 || m < 1 {
            return Err(Error::Parse {
                line: 1,
                message: format!("item and constraint counts must be positive (got {n}, {m})"),
            });
        }
        let (n, m) = (n as usize, m as usize);
        let values = (0..n).map(|_| next("value")).collect::<Result<Vec<_>>>()?;
        let weights = (0..m)
            .map(|_| (0..n).map(|_| next("weight")).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let capacities = (0..m)
            .map(|_| next("capacity"))
            .collect::<Result<Vec<_>>>()?;
        if let Some((line, tok)) = tokens.next() {
            return Err(Error::Parse {
                line,
                message: format!("trailing token {tok:?}"),
            });
        }
        Self::new(values, weights, capacities)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let join = |xs: &[i64]| xs.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        writeln!(out, "{} {}", self.items(), self.constraints()).unwrap();
        writeln!(out, "{}", join(&self.values)).unwrap();
        for row in &self.weights {
            writeln!(out, "{}", join(row)).unwrap();
        }
        writeln!(out, "{}", join(&self.capacities)).unwrap();
        out
    }
}

/// Total value when every constraint holds, otherwise minus the summed
/// capacity violations.
pub fn eval_knapsack(bits: &[bool], inst: &KnapsackInstance) -> Result<f64> {
    Error::check_dim(inst.items(), bits.len())?;
    let mut violation = 0i64;
    for (row, &cap) in inst.weights.iter().zip(&inst.capacities) {
        let load: i64 = row
            .iter()
            .zip(bits)
            .filter(|(_, &b)| b)
            .map(|(w, _)| w)
            .sum();
        violation += (load - cap).max(0);
    }
    if violation > 0 {
        return Ok(-(violation as f64));
    }
    let value: i64 = inst
        .values
        .iter()
        .zip(bits)
        .filter(|(_, &b)| b)
        .map(|(v, _)| v)
        .sum();
    Ok(value as f64)
}

/// Random instance: values and weights uniform on `[10, 100]`, each capacity
/// half of its row's total weight (rounded down).
pub fn gen_random_knapsack<R: Rng + ?Sized>(
    items: usize,
    constraints: usize,
    rng: &mut R,
) -> Result<KnapsackInstance> {
    if items == 0 || constraints == 0 {
        return Err(Error::Config(
            "random knapsack needs items and constraints >= 1".into(),
        ));
    }
    let values = (0..items).map(|_| rng.random_range(10..=100)).collect();
    let weights: Vec<Vec<i64>> = (0..constraints)
        .map(|_| (0..items).map(|_| rng.random_range(10..=100)).collect())
        .collect();
    let capacities = weights
        .iter()
        .map(|row| row.iter().sum::<i64>() / 2)
        .collect();
    KnapsackInstance::new(values, weights, capacities)
}

/// Greedy by value over total weight, adding every item that still fits.
pub fn greedy_knapsack(inst: &KnapsackInstance) -> Vec<bool> {
    let mut order: Vec<usize> = (0..inst.items()).collect();
    let density = |j: usize| {
        let w: i64 = inst.weights.iter().map(|r| r[j]).sum();
        inst.values[j] as f64 / (w.max(1) as f64)
    };
    order.sort_by(|&a, &b| density(b).total_cmp(&density(a)));
    let mut load = vec![0i64; inst.constraints()];
    let mut pick = vec![false; inst.items()];
    for j in order {
        let fits = inst
            .weights
            .iter()
            .zip(&load)
            .zip(&inst.capacities)
            .all(|((row, l), c)| l + row[j] <= *c);
        if fits {
            for (l, row) in load.iter_mut().zip(&inst.weights) {
                *l += row[j];
            }
            pick[j] = true;
        }
    }
    pick
}

#[derive(Clone, Debug)]
pub struct Knapsack {
    inst: KnapsackInstance,
    label: String,
}

impl Knapsack {
    pub fn new(inst: KnapsackInstance, label: impl Into<String>) -> Self {
        Self {
            inst,
            label: label.into(),
        }
    }

    pub fn instance(&self) -> &KnapsackInstance {
        &self.inst
    }
}

impl Problem for Knapsack {
    fn name(&self) -> String {
        format!("knapsack-{}", self.label)
    }
    fn dimension(&self) -> usize {
        self.inst.items()
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        eval_knapsack(bits, &self.inst)
    }
    fn optimum(&self) -> Option<f64> {
        self.inst.optimum.map(|v| v as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genotype::Genotype;
    use crate::rng::RngStream;

    #[test]
    fn empty_load_is_zero() {
        let inst = KnapsackInstance::new(vec![5, 7], vec![vec![3, 4]], vec![5]).unwrap();
        assert_eq!(eval_knapsack(&[false, false], &inst).unwrap(), 0.0);
        assert_eq!(eval_knapsack(&[false, true], &inst).unwrap(), 7.0);
    }

    #[test]
    fn violation_penalty() {
        let inst = KnapsackInstance::new(vec![9], vec![vec![15]], vec![10]).unwrap();
        assert_eq!(eval_knapsack(&[true], &inst).unwrap(), -5.0);
        let two =
            KnapsackInstance::new(vec![1, 1], vec![vec![6, 6], vec![1, 9]], vec![10, 5]).unwrap();
        // loads (12, 10) against (10, 5): violations 2 + 5
        assert_eq!(eval_knapsack(&[true, true], &two).unwrap(), -7.0);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "3 2\n10 20 30\n1 2 3\n4 5 6\n5 9\n";
        let inst = KnapsackInstance::parse(text).unwrap();
        assert_eq!(inst.values, vec![10, 20, 30]);
        assert_eq!(inst.weights[1], vec![4, 5, 6]);
        assert_eq!(inst.capacities, vec![5, 9]);
        assert_eq!(KnapsackInstance::parse(&inst.to_text()).unwrap(), inst);
        assert!(matches!(
            KnapsackInstance::parse("2 1\n1 x\n1 1\n1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(KnapsackInstance::parse("2 1\n1 1\n1 1\n").is_err());
        assert!(KnapsackInstance::parse("2 1\n1 1\n1 1\n1 7\n").is_err());
        assert!(KnapsackInstance::parse("1 1\n0\n1\n1\n").is_err());
    }

    #[test]
    fn random_instances_are_seeded() {
        let a = gen_random_knapsack(50, 2, &mut RngStream::new(3)).unwrap();
        let b = gen_random_knapsack(50, 2, &mut RngStream::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_capacity_between_max_weight_and_total() {
        // With weights in [10, 100] the bound max < total/2 needs N >= 12.
        let mut rng = RngStream::new(17);
        for i in 0..1000 {
            let n = 12 + i % 489;
            let inst = gen_random_knapsack(n, 1 + i % 3, &mut rng).unwrap();
            for (row, &cap) in inst.weights.iter().zip(&inst.capacities) {
                let max = *row.iter().max().unwrap();
                let total: i64 = row.iter().sum();
                assert!(
                    max < cap && cap < total,
                    "n={n} max={max} cap={cap} total={total}"
                );
            }
            let pick = greedy_knapsack(&inst);
            assert!(eval_knapsack(&pick, &inst).unwrap() > 0.0);
        }
    }

    #[test]
    fn fitness_sign_matches_feasibility() {
        let mut rng = RngStream::new(5);
        let inst = gen_random_knapsack(40, 2, &mut rng).unwrap();
        for _ in 0..2000 {
            let g = Genotype::random(40, &mut rng);
            let f = eval_knapsack(g.bits(), &inst).unwrap();
            let feasible = inst.weights.iter().zip(&inst.capacities).all(|(row, c)| {
                row.iter()
                    .zip(g.bits())
                    .filter(|(_, &b)| b)
                    .map(|(w, _)| w)
                    .sum::<i64>()
                    <= *c
            });
            if feasible {
                assert_eq!(f > 0.0, g.count_ones() > 0);
            } else {
                assert!(f < 0.0);
            }
        }
    }
}
