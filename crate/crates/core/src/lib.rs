//! Missing-data imputation and predictive-model benchmarking for daily
//! economic time series.
//!
//! A weekly series merged onto a daily index is mostly gaps. This crate
//! builds five versions of such a dataset (raw, complete-case, mean-imputed,
//! Monte-Carlo-imputed and forest-imputed "hybrid"), fits OLS and random
//! forests on each, and reports comparative tables and cross-validated
//! errors. [`simulate`] supplies scenarios with a known truth so imputers can
//! be scored directly.

pub mod config;
pub mod describe;
pub mod document;
pub mod error;
pub mod evaluate;
pub mod forest;
pub mod frame;
pub mod impute;
pub mod ingest;
pub mod ols;
pub mod rng;
pub mod simulate;
pub mod tdist;

pub use error::{Error, Result};
pub use evaluate::{run_benchmark, BenchSpec, BenchmarkReport, Learner, Metrics, ModelConfig};
pub use forest::{fit_forest, ForestHyper, ForestModel, MaxFeatures};
pub use frame::{build_frame, CalendarDate, ColumnRole, ObservationFrame, Series};
pub use impute::{impute, HybridFrame, ImputationStrategy, Provenance};
pub use ols::{fit_ols, OlsFit};
