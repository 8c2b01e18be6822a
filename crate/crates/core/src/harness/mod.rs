//! Replicate batches, rate fits and their persisted forms.

mod config;
mod experiment;
mod output;

pub use config::{ExperimentConfig, Outputs};
pub use experiment::{
    formula_moments, ols_fit, rate_experiment, run_batch, run_replicates, Batch, LambdaMoments,
    OlsFit, RateFitResult, RatePoint, ReplicateRecord,
};
pub use output::{
    ratefit_csv, read_ratefit_csv, read_records_csv, read_report_json, records_csv,
    write_ratefit_csv, write_records_csv, write_report_json,
};
