//! Exact goodness-of-fit testing for discrete distributions.
//!
//! The crate computes the root-mean-square, χ², G², Freeman-Tukey and
//! negative-log-likelihood discrepancies between observed bin counts and a
//! model distribution, and estimates their P-values by parametric-bootstrap
//! Monte-Carlo simulation: every simulated dataset is drawn from the fitted
//! model, the model parameters are re-estimated on it, and its statistic is
//! scored against the re-fitted model.
//!
//! Modules:
//!
//! * [`stats`] — count and probability vectors plus the five statistic kernels.
//! * [`models`] — parameterized model families, their probabilities and MLEs.
//! * [`sampling`] — seeded, index-derived random streams and multinomial draws.
//! * [`pvalue`] — the Monte-Carlo P-value engine and a brute-force oracle.
//! * [`power`] — detection rates and minimum sample sizes.
//! * [`datasets`] — bundled count tables and count-file parsing.

pub mod datasets;
pub mod error;
pub mod models;
pub mod power;
pub mod pvalue;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use models::{FittedModel, ModelFamily, Params, Permutation};
pub use sampling::{RngStream, Seed};
pub use stats::{CountVector, ProbabilityVector, StatisticKind};
