//! Neural-network estimation of distribution algorithms for fixed-length
//! binary genotypes.
//!
//! The crate contains a denoising autoencoder optimizer (GA-dA), a NADE
//! optimizer (GA-NADE), three baselines (a canonical GA, PBIL and a
//! bounded-parent BOA), the benchmark problems they are compared on, and an
//! experiment harness that writes plot-ready CSV.
//!
//! ```
//! use nneda::optimizers::{run, Algorithm, OptimizerConfig};
//! use nneda::problems::OneMax;
//!
//! let cfg = OptimizerConfig {
//!     algorithm: Algorithm::Ga,
//!     population: 20,
//!     evals: 2_000,
//!     ..OptimizerConfig::default()
//! };
//! let record = run(&cfg, &OneMax::new(12), 7).unwrap();
//! assert!(record.best_fitness() <= 12.0);
//! ```

pub mod error;
pub mod genotype;
pub mod harness;
pub mod models;
pub mod optimizers;
pub mod problems;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
pub use genotype::{hamming_distance, Genotype, Population};
pub use rng::RngStream;
