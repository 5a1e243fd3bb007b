//! Experiment harness: declarative experiment specs, seeded multi-trial
//! execution, grid search, summary statistics and the model-introspection
//! analyses. Every artifact is a CSV file with a fixed column order and
//! 6-significant-digit floats, so reruns are byte-identical.

mod analysis;
mod experiment;
mod format;
mod grid;
mod spec;

pub use analysis::{
    analyze_covariance, analyze_diversity, clamp_study, indicators, parse_clamp, read_samples,
    write_samples, ClampReport, CovarianceReport, Group, Predicate, SampleRow,
};
pub use experiment::{
    run_experiment, summarize, write_outputs, ExperimentResult, SummaryRow, TrialResult,
};
pub use format::fmt_g;
pub use grid::{
    default_grid, expand_grid, grid_search, rank_cells, write_grid, GridCell, GridOutcome,
    GridPoint,
};
pub use spec::{
    AlgorithmEntry, ExperimentSpec, MaskMode, ProblemKind, ProblemSpec, OUTPUT_ROOT_ENV,
};
