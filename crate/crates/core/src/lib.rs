//! Maximum-entry statistics of empirical moment tensors and the Gumbel-type
//! test of coordinate independence built on them.
//!
//! For an `n × p` sample and order `m`, the statistic is
//! `W_n = max_{i1<…<im} |Σ_k Π_j x_{k,ij}| / √n`. Under independence,
//! `W_n² − 2m·log p + log log p` converges to a Gumbel-type law.

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod hypotest;
pub mod lab;
pub mod matrix;
pub mod populations;
pub mod rng;
pub mod statcore;

pub use asymptotics::{normalize, nu_p, GumbelLimit, NormalizedStat, Sidedness};
pub use error::{Error, Result};
pub use hypotest::{test_independence, test_independence_multi, TestOptions, TestResult};
pub use lab::{run_experiment, ExperimentConfig, ExperimentReport};
pub use matrix::DataMatrix;
pub use populations::{sample_matrix, Family, PopulationSpec};
pub use rng::SeedSpec;
pub use statcore::{max_entry, max_entry_multi, MultiSampleInput, StatResult, TupleIndex};
