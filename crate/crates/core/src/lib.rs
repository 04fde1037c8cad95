//! Probabilistic-gap learning from positive and unlabelled data.
//!
//! Unlabelled examples are treated as noisy negatives whose chance of having
//! lost a positive label decreases with the probabilistic gap
//! `P(Y=+1|x) - P(Y=-1|x)`. The pipeline
//!
//! 1. estimates the observed gap with a Platt-calibrated SVM ([`svm`]),
//! 2. relabels the unlabelled points the Bayes classifier is certain about
//!    ([`relabel`]),
//! 3. corrects the resulting domain bias with kernel mean matching ([`kmm`]),
//! 4. and trains an importance-weighted SVM on the relabelled sample
//!    ([`pipeline`]).
//!
//! [`datagen`] provides the synthetic benchmarks and CSV I/O, and
//! [`harness`] the baselines, experiment runner and reporting used by the
//! `pgpu` command line tool.

pub mod datagen;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod kmm;
pub mod pipeline;
pub mod relabel;
pub mod seed;
pub mod svm;

pub use datagen::{PuDataset, PuSample};
pub use error::{PgpuError, Result};
pub use kernels::KernelSpec;
pub use kmm::{solve_kmm, BetaWeights, KmmConfig};
pub use pipeline::{fit_pgpu, run_pgpu, BoundaryMode, PgpuParams};
pub use relabel::{FlipRateSpec, GapEstimate, RelabelResult};
pub use svm::{PlattCalibration, ProbabilisticSvm, SvmModel, SvmParams};
