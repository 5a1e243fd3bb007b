use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use super::experiment::{run_trial, thread_pool, TrialResult};
use super::format::fmt_g;
use super::spec::{AlgorithmEntry, ExperimentSpec};
use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, OptimizerConfig};

/// The shipped grid ranges used when an algorithm entry sets
/// `grid_defaults = true`.
pub fn default_grid(algorithm: Algorithm) -> BTreeMap<String, Vec<toml::Value>> {
    use toml::Value::{Boolean, Float, Integer};
    let mut g = BTreeMap::new();
    g.insert(
        "population".to_string(),
        vec![Integer(100), Integer(500), Integer(1000)],
    );
    g.insert("niching".to_string(), vec![Boolean(false), Boolean(true)]);
    g.insert("niche_window".to_string(), vec![Integer(10), Integer(50)]);
    if algorithm.is_neural() {
        g.insert(
            "hidden".to_string(),
            vec![Integer(32), Integer(64), Integer(128)],
        );
        g.insert(
            "learning_rate".to_string(),
            vec![Float(0.01), Float(0.05), Float(0.1)],
        );
    }
    if algorithm == Algorithm::Da {
        g.insert(
            "corruption".to_string(),
            [0.05, 0.25, 0.5, 0.9].into_iter().map(Float).collect(),
        );
    }
    g
}

/// One grid cell: a parameter assignment and its averaged outcome.
#[derive(Clone, Debug)]
pub struct GridCell {
    /// `(field, value)` pairs in field-name order.
    pub params: Vec<(String, toml::Value)>,
    pub config: OptimizerConfig,
    pub mean_best: f64,
    pub mean_evals: f64,
    pub success_pct: f64,
}

#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub label: String,
    /// Cells sorted best first.
    pub cells: Vec<GridCell>,
}

impl GridOutcome {
    pub fn winner(&self) -> &GridCell {
        &self.cells[0]
    }
}

/// A parameter assignment and the config it produces.
pub type GridPoint = (Vec<(String, toml::Value)>, OptimizerConfig);

/// Cartesian product of `ranges` applied on top of `base`. Later fields vary
/// fastest.
pub fn expand_grid(
    base: &OptimizerConfig,
    ranges: &BTreeMap<String, Vec<toml::Value>>,
) -> Result<Vec<GridPoint>> {
    if ranges.is_empty() || ranges.values().any(Vec::is_empty) {
        return Err(Error::Config("empty grid".into()));
    }
    let base_table = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
    let mut assignments: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
    for (key, values) in ranges {
        assignments = assignments
            .into_iter()
            .flat_map(|a| {
                values.iter().map(move |v| {
                    let mut next = a.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    assignments
        .into_iter()
        .map(|params| {
            let mut table = base_table.clone();
            for (k, v) in &params {
                table.insert(k.clone(), v.clone());
            }
            let cfg: OptimizerConfig = table.try_into().map_err(|e: toml::de::Error| {
                Error::Config(format!("grid cell {}: {e}", describe(&params)))
            })?;
            Ok((params, cfg))
        })
        .collect()
}

fn value_cmp(a: &toml::Value, b: &toml::Value) -> Ordering {
    use toml::Value::*;
    let num = |v: &toml::Value| match v {
        Integer(i) => Some(*i as f64),
        Float(f) => Some(*f),
        _ => None,
    };
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => match (a, b) {
            (Boolean(x), Boolean(y)) => x.cmp(y),
            (String(x), String(y)) => x.cmp(y),
            _ => a.to_string().cmp(&b.to_string()),
        },
    }
}

fn params_cmp(a: &[(String, toml::Value)], b: &[(String, toml::Value)]) -> Ordering {
    for ((ka, va), (kb, vb)) in a.iter().zip(b) {
        let o = ka.cmp(kb).then_with(|| value_cmp(va, vb));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Sorts best first: higher mean best fitness, then fewer mean evaluations,
/// then lexicographically smaller parameter values.
pub fn rank_cells(cells: &mut [GridCell]) {
    cells.sort_by(|a, b| {
        b.mean_best
            .total_cmp(&a.mean_best)
            .then_with(|| a.mean_evals.total_cmp(&b.mean_evals))
            .then_with(|| params_cmp(&a.params, &b.params))
    });
}

fn describe(params: &[(String, toml::Value)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Evaluates every grid cell of every algorithm that declares ranges, with
/// `spec.grid_trials` trials per cell.
pub fn grid_search(spec: &ExperimentSpec) -> Result<Vec<GridOutcome>> {
    let entries: Vec<&AlgorithmEntry> = spec
        .algorithms
        .iter()
        .filter(|a| !a.grid.is_empty())
        .collect();
    if entries.is_empty() {
        return Err(Error::Config(
            "empty grid: no algorithm declares grid ranges".into(),
        ));
    }
    let pool = thread_pool(spec.jobs)?;
    entries
        .into_iter()
        .map(|entry| {
            let cells = expand_grid(&entry.config, &entry.grid)?;
            for (params, cfg) in &cells {
                cfg.validate()
                    .map_err(|e| Error::Config(format!("grid cell {}: {e}", describe(params))))?;
            }
            let tasks: Vec<(usize, usize)> = (0..cells.len())
                .flat_map(|c| (0..spec.grid_trials).map(move |t| (c, t)))
                .collect();
            let results: Vec<TrialResult> = pool.install(|| {
                tasks
                    .par_iter()
                    .map(|&(c, t)| {
                        let cell_entry = AlgorithmEntry {
                            config: cells[c].1.clone(),
                            ..entry.clone()
                        };
                        run_trial(spec, &cell_entry, t, spec.trial_seed(t))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut ranked: Vec<GridCell> = cells
                .into_iter()
                .zip(results.chunks(spec.grid_trials))
                .map(|((params, config), trials)| {
                    let n = trials.len() as f64;
                    GridCell {
                        params,
                        config,
                        mean_best: trials.iter().map(|t| t.record.best_fitness()).sum::<f64>() / n,
                        mean_evals: trials.iter().map(|t| t.evals_charged() as f64).sum::<f64>()
                            / n,
                        success_pct: 100.0
                            * trials.iter().filter(|t| t.record.success).count() as f64
                            / n,
                    }
                })
                .collect();
            rank_cells(&mut ranked);
            Ok(GridOutcome {
                label: entry.label.clone(),
                cells: ranked,
            })
        })
        .collect()
}

/// Writes `grid.csv` (every cell, ranked) and `best_<label>.toml` (the
/// winning config of each algorithm).
pub fn write_grid(dir: &Path, outcomes: &[GridOutcome]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("grid.csv"))?;
    w.write_record([
        "algorithm",
        "rank",
        "params",
        "mean_best",
        "mean_evals",
        "success_pct",
    ])?;
    for o in outcomes {
        for (rank, c) in o.cells.iter().enumerate() {
            w.write_record([
                o.label.clone(),
                (rank + 1).to_string(),
                describe(&c.params),
                fmt_g(c.mean_best),
                fmt_g(c.mean_evals),
                fmt_g(c.success_pct),
            ])?;
        }
        let text = toml::to_string(&o.winner().config).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(dir.join(format!("best_{}.toml", o.label)), text)?;
    }
    w.flush()?;
    Ok(())
}
