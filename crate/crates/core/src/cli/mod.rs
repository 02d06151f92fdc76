//! Configuration-driven experiment runner.
//!
//! Configurations are TOML files. Every run writes its CSV and plot-data
//! outputs plus a `summary.json` into one output directory.

mod config;
mod plot;
mod run;

pub use config::{
    Constants, ExperimentConfig, ExperimentKind, InitialConfig, MeshConfig, NlConfig, OutputConfig, ProblemConfig,
    TimeConfig,
};
pub use plot::{emit_plot_data, PlotInput, PlotStyle};
pub use run::{load_config, run, RunOptions, RunSummary};
