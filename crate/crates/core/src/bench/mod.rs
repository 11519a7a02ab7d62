//! Experiment harness: task presets, batch restoration runs, the operator
//! probe suite and convergence plot data.

mod config;
mod experiment;
mod plots;
mod probe_suite;

pub use config::{expand_globs, preset, ExperimentConfig, Overrides, Preset, Task, PRESET_NAMES};
pub use experiment::{prepare, run_experiment, write_summary, ExperimentResult, ImageOutcome, Prepared, SummaryRow};
pub use plots::emit_convergence_plots;
pub use probe_suite::{candidate_fixed_points, run_probe_suite, DILATION_MARGIN, ProbeSuiteResult, SampleSource};
