//! Metrics, experiment configuration and the staged experiment runner.

mod config;
mod metrics;
mod neural;
mod pipeline;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ExperimentConfig, WORKERS_ENV};
pub use metrics::{
    evasion_success_rate, family_total, transformation_success_rate, ErrorTable, EvasionOutcome, EvasionVerdict,
    TransformVerdict, TransformationOutcome,
};
pub use neural::{NeuralInput, NeuralManifest, NeuralOutput, NeuralOutputManifest, MANIFEST_ENV};
pub use pipeline::{
    run_experiment, Artifacts, EvasionRecord, Experiment, VerdictLogs, MCTS, PRIMARY_MODEL, RANDOM, SECONDARY_MODEL,
};
pub use report::{AttributionSummary, EvasionSummary, MetricsReport, NeuralSummary, StageTiming};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    /// Artifacts written by earlier stages are left in place.
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}
