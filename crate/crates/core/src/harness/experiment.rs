use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::format::fmt_g;
use super::spec::{AlgorithmEntry, ExperimentSpec};
use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::optimizers::{run, RunRecord};

/// One finished trial.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub label: String,
    pub trial: usize,
    pub seed: u64,
    /// Mask the optimizer saw the problem through, if any.
    pub mask: Option<Genotype>,
    pub record: RunRecord,
}

impl TrialResult {
    /// Best genotype in the problem's own coordinates.
    pub fn best_unmasked(&self) -> Result<Genotype> {
        match &self.mask {
            Some(m) => self.record.best.xor(m),
            None => Ok(self.record.best.clone()),
        }
    }

    /// Evaluations to the optimum, or the budget when it was never reached.
    pub fn evals_charged(&self) -> usize {
        self.record
            .evals_to_optimum
            .unwrap_or(self.record.config.evals)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub trials: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub mean_evals: f64,
    pub sd_evals: f64,
    pub success_pct: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    /// Grouped by algorithm in spec order, then by trial.
    pub trials: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Statistics over the trials of one algorithm. Standard deviations are
/// sample (n - 1) deviations.
pub fn summarize(label: &str, trials: &[&TrialResult]) -> SummaryRow {
    let best: Vec<f64> = trials.iter().map(|t| t.record.best_fitness()).collect();
    let evals: Vec<f64> = trials.iter().map(|t| t.evals_charged() as f64).collect();
    let (mean, sd) = mean_sd(&best);
    let (mean_evals, sd_evals) = mean_sd(&evals);
    let successes = trials.iter().filter(|t| t.record.success).count();
    SummaryRow {
        algorithm: label.to_string(),
        trials: trials.len(),
        min: best.iter().copied().fold(f64::INFINITY, f64::min),
        max: best.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        sd,
        mean_evals,
        sd_evals,
        success_pct: 100.0 * successes as f64 / trials.len().max(1) as f64,
    }
}

pub(crate) fn run_trial(
    spec: &ExperimentSpec,
    entry: &AlgorithmEntry,
    trial: usize,
    trials_seed: u64,
) -> Result<TrialResult> {
    let (problem, mask) = spec.trial_problem(entry, trials_seed)?;
    let record = run(&entry.config, problem.as_ref(), trials_seed)?;
    Ok(TrialResult {
        label: entry.label.clone(),
        trial,
        seed: trials_seed,
        mask,
        record,
    })
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))
}

/// Runs every trial of every algorithm. Trial `t` uses seed
/// `base_seed + t`; trials run on `spec.jobs` threads but results are
/// collected in spec order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let tasks: Vec<(&AlgorithmEntry, usize)> = spec
        .algorithms
        .iter()
        .flat_map(|a| (0..spec.trials).map(move |t| (a, t)))
        .collect();
    let pool = thread_pool(spec.jobs)?;
    let trials = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(entry, t)| run_trial(spec, entry, t, spec.trial_seed(t)))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = spec
        .algorithms
        .iter()
        .map(|a| {
            let mine: Vec<&TrialResult> = trials.iter().filter(|t| t.label == a.label).collect();
            summarize(&a.label, &mine)
        })
        .collect();
    Ok(ExperimentResult { trials, summary })
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

/// Writes `records.csv`, `trials.csv` and `summary.csv` into `dir`, and
/// model checkpoints under `dir/models` when `save_models` is set.
pub fn write_outputs(dir: &Path, result: &ExperimentResult, save_models: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut records = writer(
        &dir.join("records.csv"),
        &["algorithm", "trial", "generation", "evals", "best_fitness"],
    )?;
    let mut trials = writer(
        &dir.join("trials.csv"),
        &[
            "algorithm",
            "trial",
            "seed",
            "generations",
            "evals_used",
            "success",
            "evals_to_optimum",
            "best_fitness",
            "best",
            "failure",
        ],
    )?;
    for t in &result.trials {
        let r = &t.record;
        for s in &r.history {
            records.write_record([
                t.label.clone(),
                t.trial.to_string(),
                s.generation.to_string(),
                s.evals.to_string(),
                fmt_g(s.best_fitness),
            ])?;
        }
        trials.write_record([
            t.label.clone(),
            t.trial.to_string(),
            t.seed.to_string(),
            r.generations().to_string(),
            r.evals_used.to_string(),
            r.success.to_string(),
            r.evals_to_optimum.map_or(String::new(), |e| e.to_string()),
            fmt_g(r.best_fitness()),
            t.best_unmasked()?.to_bitstring(),
            r.failure.clone().unwrap_or_default(),
        ])?;
        if save_models {
            if let Some(model) = &r.model {
                let models = dir.join("models");
                fs::create_dir_all(&models)?;
                let stem = format!("{}_trial{}", t.label, t.trial);
                model.save(models.join(format!("{stem}.model")))?;
                if let Some(mask) = &t.mask {
                    fs::write(models.join(format!("{stem}.mask")), format!("{mask}\n"))?;
                }
            }
        }
    }
    records.flush()?;
    trials.flush()?;
    let mut summary = writer(
        &dir.join("summary.csv"),
        &[
            "algorithm",
            "trials",
            "min",
            "max",
            "mean",
            "sd",
            "mean_evals",
            "sd_evals",
            "success_pct",
        ],
    )?;
    for s in &result.summary {
        summary.write_record([
            s.algorithm.clone(),
            s.trials.to_string(),
            fmt_g(s.min),
            fmt_g(s.max),
            fmt_g(s.mean),
            fmt_g(s.sd),
            fmt_g(s.mean_evals),
            fmt_g(s.sd_evals),
            fmt_g(s.success_pct),
        ])?;
    }
    summary.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_uses_sample_deviation() {
        assert_eq!(mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).0, 5.0);
        let (_, sd) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }
}
