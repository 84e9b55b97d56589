//! Configuration-driven experiment sweeps, CSV and plot-data output, and
//! the built-in table and figure configurations.

pub mod builtin;
mod config;
mod output;
mod run;
mod selftest;

pub use builtin::{figure_configs, table_configs};
pub use config::{ConfigFile, ExperimentConfig, Measure, ProblemSpec, ReferenceSpec, TimeMode, SCHEMA_VERSION};
pub use output::{create_dir, emit_csv, emit_plotdata, parse_csv, render_plotdata, write_file, CSV_HEADER};
pub use run::{run_config, run_experiment, CellFailure, ExperimentResult, PlotData, ResultRow};
pub use selftest::{selftest, SelfCheck, SelfTestReport};
