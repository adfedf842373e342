//! Config-driven pipelines that sample from a ground-truth language, fit a
//! candidate, score both, and write CSV reports plus a manifest.
//!
//! Each run writes into `out_dir`: its CSVs, the fitted model files,
//! `summary.json`, `manifest.json` with hashes of every output, and
//! `timings.json`. Under an identical config every file except the
//! timings is byte-identical across runs.

mod candidate;
mod config;
mod manifest;
mod runs;

pub use candidate::{fit_candidate, Candidate, ModelFile, StoredModel, MODEL_FORMAT_VERSION};
pub use config::{
    BinConfig, CandidateConfig, CandidateKind, CorpusSizes, ExperimentConfig, ExperimentKind,
    LanguageSource, PerturbationConfig,
};
pub use manifest::{sha256_hex, OutputFile, RunManifest, StageTime, MANIFEST_FILE};
pub use runs::{
    replay, run, run_epoch_tracking, run_fixed_data, run_online, run_perturbation,
    run_temperature_sweep, EpochCurve, EpochTrackingSummary, FixedDataSummary, OnlineIteration,
    OnlineSummary, PerturbationSummary, RunOutput, RunSummary, TemperatureResult,
    TemperatureSweepSummary,
};
