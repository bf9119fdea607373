//! Metrics, cross-validated tuning and the dims x noise x model grid.

mod cv;
mod grid;
mod metrics;

pub use cv::{
    append_noise_vectors, cross_validate_tune, expand_grid, stratified_folds, stratified_split, CandidateScore, CvOptions,
    NoiseVectors, TuneReport,
};
pub use grid::{
    run_grid, summarize, ExperimentConfig, GridCell, GridConfig, GridReport, HyperGrid, Protocol,
    SeriesPoint, SmoteConfig, SummaryRow,
};
pub use metrics::{auc, confusion, confusion_metrics, score_metrics, Confusion, MetricSet};
