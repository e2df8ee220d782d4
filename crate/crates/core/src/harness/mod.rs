//! Named experiments, timing and table output.

mod config;
mod emit;
mod run;

pub use config::{
    linspace, parse_copula, parse_marginal, parse_methods, ExperimentConfig, ExperimentName,
    GridSpec, Method, OutputFormat,
};
pub use emit::{
    emit, from_json_str, read_csv, to_csv_string, to_json_string, write_csv, CSV_HEADER,
};
pub use run::{
    coverage_range, pima_result, resolve_grid, run_experiment, run_experiment_on_grid,
    version_string, wnrv, EstimateRow, ExperimentResult, MethodTiming, RunMetadata,
    DEFAULT_PIMA_PATH,
};

/// Environment variable overriding the default master seed.
pub const SEED_ENV: &str = "SUMDENS_SEED";
