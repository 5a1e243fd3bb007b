use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::Problem;

/// A CNF formula; literal `+v` / `-v` refers to variable `v` in `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::Config(format!("clause {i} is empty")));
            }
            if let Some(&lit) = clause
                .iter()
                .find(|&&l| l == 0 || l.unsigned_abs() as usize > num_vars)
            {
                return Err(Error::Config(format!(
                    "clause {i}: literal {lit} outside 1..={num_vars}"
                )));
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_dimacs(&text)
    }

    /// DIMACS text with one clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses DIMACS CNF.
///
/// Lines starting with `c` are comments. A `%` line (the SATLIB end marker)
/// terminates the body. Clauses are zero-terminated and may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(line_no, format!("malformed header {line:?}")));
            }
            let vars = parts[2]
                .parse()
                .map_err(|_| err(line_no, format!("bad variable count {:?}", parts[2])))?;
            let count = parts[3]
                .parse()
                .map_err(|_| err(line_no, format!("bad clause count {:?}", parts[3])))?;
            header = Some((vars, count, line_no));
            continue;
        }
        let Some((vars, count, _)) = header else {
            return Err(err(line_no, "clause before problem line".into()));
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| err(line_no, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(err(line_no, "empty clause".into()));
                }
                if clauses.len() == count {
                    return Err(err(line_no, format!("more than {count} clauses")));
                }
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(err(line_no, format!("literal {lit} outside 1..={vars}")));
            } else {
                current.push(lit);
            }
        }
    }

    let Some((vars, count, header_line)) = header else {
        return Err(err(last_line.max(1), "missing problem line".into()));
    };
    if !current.is_empty() {
        return Err(err(last_line, "unterminated final clause".into()));
    }
    if clauses.len() != count {
        return Err(err(
            header_line,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    Ok(CnfFormula {
        num_vars: vars,
        clauses,
    })
}

/// Number of clauses with at least one true literal; bit `i` is variable `i + 1`.
pub fn eval_maxsat(bits: &[bool], formula: &CnfFormula) -> Result<f64> {
    Error::check_dim(formula.num_vars, bits.len())?;
    let satisfied = formula
        .clauses
        .iter()
        .filter(|clause| {
            clause
                .iter()
                .any(|&lit| bits[lit.unsigned_abs() as usize - 1] == (lit > 0))
        })
        .count();
    Ok(satisfied as f64)
}

#[derive(Clone, Debug)]
pub struct MaxSat {
    formula: CnfFormula,
    label: String,
    optimum: Option<f64>,
}

impl MaxSat {
    /// `optimum` defaults to the clause count, i.e. the instance is assumed
    /// satisfiable unless stated otherwise.
    pub fn new(formula: CnfFormula, label: impl Into<String>) -> Self {
        let optimum = Some(formula.clauses.len() as f64);
        Self {
            formula,
            label: label.into(),
            optimum,
        }
    }

    pub fn with_optimum(mut self, optimum: Option<f64>) -> Self {
        self.optimum = optimum;
        self
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }
}

impl Problem for MaxSat {
    fn name(&self) -> String {
        format!("maxsat-{}", self.label)
    }
    fn dimension(&self) -> usize {
        self.formula.num_vars
    }
    fn evaluate(&self, bits: &[bool]) -> Result<f64> {
        eval_maxsat(bits, &self.formula)
    }
    fn optimum(&self) -> Option<f64> {
        self.optimum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_instance() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0").unwrap();
        assert_eq!(f.num_vars, 2);
        assert_eq!(f.clauses, vec![vec![1, -2]]);
    }

    #[test]
    fn comments_and_satlib_trailer() {
        let f = parse_dimacs("c hello\nc world\np cnf 2 1\n1 -2 0\n%\n0\n\n").unwrap();
        assert_eq!(f, parse_dimacs("p cnf 2 1\n1 -2 0").unwrap());
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse_dimacs("p cnf 3 2\n1 2\n3 0 -1\n-2 0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1, 2, 3], vec![-1, -2]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_dimacs("p cnf 3 3\n1 2 0\n-1 3 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = parse_dimacs("c x\np cnf 2 1\n1 5 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_dimacs("p dnf 2 1\n1 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = parse_dimacs("1 2 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        assert!(parse_dimacs("p cnf 2 1\n1 x 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 0\n0\n").is_err());
        assert!(parse_dimacs("c only comments\n").is_err());
    }

    #[test]
    fn maxsat_values() {
        let empty = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(eval_maxsat(&[true, false, true], &empty).unwrap(), 0.0);
        let f = CnfFormula::new(2, vec![vec![1, -2]]).unwrap();
        assert_eq!(eval_maxsat(&[true, false], &f).unwrap(), 1.0);
        assert_eq!(eval_maxsat(&[false, true], &f).unwrap(), 0.0);
        assert!(eval_maxsat(&[true], &f).is_err());
    }

    fn formula_strategy() -> impl Strategy<Value = CnfFormula> {
        (1usize..12).prop_flat_map(|vars| {
            let lit =
                (1..=vars as i32, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
            prop::collection::vec(prop::collection::vec(lit, 1..5), 0..20)
                .prop_map(move |clauses| CnfFormula::new(vars, clauses).unwrap())
        })
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(f in formula_strategy()) {
            prop_assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
        }

        #[test]
        fn adding_a_clause_adds_zero_or_one(f in formula_strategy(), extra in prop::collection::vec(any::<bool>(), 3), seed in any::<u64>()) {
            let bits: Vec<bool> = (0..f.num_vars).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let before = eval_maxsat(&bits, &f).unwrap();
            let mut g = f.clone();
            let clause: Vec<i32> = extra.iter().enumerate().map(|(i, &neg)| {
                let v = (i % f.num_vars) as i32 + 1;
                if neg { -v } else { v }
            }).collect();
            g.clauses.push(clause);
            let after = eval_maxsat(&bits, &g).unwrap();
            prop_assert!(after == before || after == before + 1.0);
        }
    }
}
