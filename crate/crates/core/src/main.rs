use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nneda::harness::{
    analyze_covariance, analyze_diversity, clamp_study, fmt_g, grid_search, parse_clamp,
    read_samples, run_experiment, write_grid, write_outputs, write_samples, ExperimentSpec, Group,
};
use nneda::models::Model;
use nneda::{Error, Genotype, Result, RngStream};

#[derive(Parser)]
#[command(
    name = "nneda",
    version,
    about = "Neural-network EDAs and baselines on binary benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of every algorithm in a spec.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Grid search over the ranges declared in a spec.
    Grid {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Model and sample introspection.
    #[command(subcommand)]
    Analyze(Analysis),
    /// Draw samples from a model checkpoint into samples.csv.
    Sample {
        checkpoint: PathBuf,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate the samples on this spec's problem.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Bit mask the model was trained under; samples are unmasked.
        #[arg(long)]
        unmask: Option<String>,
        #[arg(long, short, default_value = "samples.csv")]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Output directory (default: spec value, else $NNEDA_OUTPUT_ROOT/<name>).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, short)]
    jobs: Option<usize>,
    #[arg(long)]
    save_models: bool,
}

#[derive(Subcommand)]
enum Analysis {
    /// Covariance between group indicators over a samples file.
    Cov {
        #[arg(long)]
        samples: PathBuf,
        /// Group such as `ones:0-3` or `zeros:4,5`; repeat for more groups.
        #[arg(long = "group", required = true)]
        groups: Vec<String>,
        #[arg(long, short, default_value = "analysis_cov.csv")]
        output: PathBuf,
    },
    /// Mean distance of each sample to its k nearest neighbours.
    Diversity {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, short, default_value = "analysis_diversity.csv")]
        output: PathBuf,
    },
    /// Per-locus one-probabilities of a model under a clamp.
    Clamp {
        #[arg(long)]
        model: PathBuf,
        /// Clamp such as `0-7=1;12=0`; empty for none.
        #[arg(long, default_value = "")]
        clamp: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "group")]
        groups: Vec<String>,
        /// dA inputs; uniform random inputs when absent.
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, short, default_value = ".")]
        output: PathBuf,
    },
}

fn load_spec(path: &Path, o: &Overrides) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_path(path)?;
    if let Some(t) = o.trials {
        spec.trials = t;
    }
    if let Some(s) = o.base_seed {
        spec.base_seed = s;
    }
    if let Some(d) = &o.output {
        spec.output_dir = d.clone();
    }
    if let Some(j) = o.jobs {
        spec.jobs = j;
    }
    spec.save_models |= o.save_models;
    if spec.trials == 0 || spec.jobs == 0 {
        return Err(Error::Config("trials and jobs must be at least 1".into()));
    }
    Ok(spec)
}

fn groups(raw: &[String]) -> Result<Vec<Group>> {
    raw.iter().map(|g| g.parse()).collect()
}

fn csv_out(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { spec, overrides } => {
            let spec = load_spec(&spec, &overrides)?;
            let result = run_experiment(&spec)?;
            write_outputs(&spec.output_dir, &result, spec.save_models)?;
            for s in &result.summary {
                println!(
                    "{}: best {} ± {} (min {}, max {}), evals {} ± {}, success {}%",
                    s.algorithm,
                    fmt_g(s.mean),
                    fmt_g(s.sd),
                    fmt_g(s.min),
                    fmt_g(s.max),
                    fmt_g(s.mean_evals),
                    fmt_g(s.sd_evals),
                    fmt_g(s.success_pct)
                );
            }
            println!("wrote {}", spec.output_dir.display());
        }
        Command::Grid { spec, overrides } => {
            let spec = load_spec(&spec, &overrides)?;
            let outcomes = grid_search(&spec)?;
            write_grid(&spec.output_dir, &outcomes)?;
            for o in &outcomes {
                let w = o.winner();
                let params: Vec<String> =
                    w.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "{}: {} (mean best {}, mean evals {})",
                    o.label,
                    params.join(" "),
                    fmt_g(w.mean_best),
                    fmt_g(w.mean_evals)
                );
            }
            println!("wrote {}", spec.output_dir.display());
        }
        Command::Analyze(Analysis::Cov {
            samples,
            groups: raw,
            output,
        }) => {
            let s = read_samples(&samples)?;
            let gs = groups(&raw)?;
            let rep = analyze_covariance(&s, &gs)?;
            let mut header = vec!["group".to_string(), "mean".to_string()];
            header.extend(raw.iter().cloned());
            let rows = raw.iter().enumerate().map(|(a, name)| {
                let mut row = vec![name.clone(), fmt_g(rep.means[a])];
                row.extend(rep.cov[a].iter().map(|&c| fmt_g(c)));
                row
            });
            csv_out(&output, &header, rows)?;
        }
        Command::Analyze(Analysis::Diversity { samples, k, output }) => {
            let s = read_samples(&samples)?;
            let d = analyze_diversity(&s, k)?;
            let header = ["index", "mean_knn_distance", "fitness"].map(String::from);
            let rows = s.iter().zip(&d).enumerate().map(|(i, (g, &m))| {
                vec![
                    i.to_string(),
                    fmt_g(m),
                    g.fitness().map_or(String::new(), fmt_g),
                ]
            });
            csv_out(&output, &header, rows)?;
        }
        Command::Analyze(Analysis::Clamp {
            model,
            clamp,
            samples,
            seed,
            groups: raw,
            inputs,
            output,
        }) => {
            let m = Model::load(&model)?;
            let c = parse_clamp(&clamp, m.dim())?;
            let gs = groups(&raw)?;
            let inputs = inputs.map(|p| read_samples(&p)).transpose()?;
            let mut rng = RngStream::new(seed).substream("clamp");
            let rep = clamp_study(&m, &c, samples, &gs, inputs.as_deref(), &mut rng)?;
            std::fs::create_dir_all(&output)?;
            csv_out(
                &output.join("analysis_clamp_loci.csv"),
                &["locus", "p_one"].map(String::from),
                rep.locus_means
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| vec![i.to_string(), fmt_g(p)]),
            )?;
            csv_out(
                &output.join("analysis_clamp_groups.csv"),
                &["group", "frequency"].map(String::from),
                raw.iter()
                    .zip(&rep.group_freqs)
                    .map(|(g, &f)| vec![g.clone(), fmt_g(f)]),
            )?;
        }
        Command::Sample {
            checkpoint,
            n,
            seed,
            spec,
            unmask,
            output,
        } => {
            let m = Model::load(&checkpoint)?;
            let mask = unmask
                .as_deref()
                .map(Genotype::from_bitstring)
                .transpose()?;
            let problem = spec
                .map(|s| ExperimentSpec::from_path(s).map(|s| s.problem))
                .transpose()?;
            let mut rng = RngStream::new(seed).substream("sample");
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let mut g = m.sample(None, None, &mut rng)?;
                if let Some(mask) = &mask {
                    g = g.xor(mask)?;
                }
                if let Some(p) = &problem {
                    g.evaluate(p.as_ref())?;
                }
                out.push(g);
            }
            if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_samples(&output, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
