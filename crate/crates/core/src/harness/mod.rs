//! Config-driven Monte-Carlo experiments: trial execution, CSV persistence,
//! log-log slope fitting and SVG plots.

mod config;
mod plot;
pub mod presets;
mod records;
mod runner;
mod stats;

pub use config::{default_min_measurements, ExperimentConfig, ExperimentKind, MGrid};
pub use plot::{emit_plot, sidecar_path, PlotStyle, PlotSummary};
pub use records::{format_sig9, read_records, write_audits, write_records, Column, TrialRecord, CSV_HEADER};
pub use runner::{run_experiment, run_to_file, trial_seed, audit_path, ExperimentOutput};
pub use stats::{aggregate, fit_loglog, fit_loglog_slope, Fit, GroupFit, Regressor, Series, SeriesPoint, SlopeOptions};
