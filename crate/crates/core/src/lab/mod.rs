//! Experiment harness: presets, configuration, runs and CSV output.

mod config;
mod output;
mod presets;
mod runs;

pub use config::{
    CoefficientConfig, DensityConfig, EvaluationConfig, Experiment, ExperimentConfig, FitConfig, FrozenConfig,
    ModelConfig, OracleConfig, OracleKind, OutputConfig, PayoffConfig, PayoffKind, SchemeConfig, SchemeKind,
};
pub use output::{sidecar_path, write_csv, write_csv_to, write_report};
pub use presets::{preset, HestonLikeModel, LocalVolModel, Preset, TanhExp, PRESET_NAMES};
pub use runs::{
    fit_slope, run_bootstrap, run_convergence, run_density, run_price, BootstrapRow, ConvergenceRow, DensityRow,
    OracleValue, PriceRow, Report, SlopeFit,
};
