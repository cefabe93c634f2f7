//! Config-driven experiments and their result files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{preset, DepthGrid, ExperimentConfig, ProtocolChoice, RatioSettings, TargetKind, TargetSpec, PRESET_NAMES};
pub use output::{
    config_hash, read_raw_csv, refit, summary_document, write_bundle, FitRecord, Provenance, RawRow, ResultBundle,
    SummaryDocument,
};
pub use run::{
    compare, comparison_table, ratio_analysis, reference_ratio, run_experiment, ComparisonRow, ExactReference,
    ExperimentOutcome, ProtocolRun, ProtocolSummary, RatioAnalysis, ReferenceOutcome,
};
