//! Sweep configuration, execution and output, plus the validation suite.

mod config;
mod csv;
mod moments;
mod plot;
mod sweep;
mod validate;

pub use config::{ExperimentConfig, GridPoint, McConfig, ScenarioConfig, SweepConfig, SweepKind};
pub use csv::{emit_csv, format_csv, format_number, parse_csv, CSV_HEADER};
pub use moments::{
    compare_moments, simulate_lemma2, simulate_lemma4, MomentComparison, MomentEstimate,
};
pub use plot::{emit_plot_script, plot_script, PlotFilter, PlotOptions};
pub use sweep::{approx_rates, run_sweep, scenario_drop, SweepRow};
pub use validate::{
    error_variance_deviation, validate, CheckOutcome, ValidateOptions, ValidationReport,
    MOMENT_TRIALS, STAT_TRIALS, Z_LIMIT,
};
