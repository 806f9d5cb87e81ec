//! Configuration, presets and CSV output for the `alloc-bandit` binary.

pub mod config;
pub mod experiment;
pub mod presets;

pub use config::{parse_config, parse_config_with_overrides, ConfigError, ExperimentSpec};
pub use experiment::{bounds_rows, fmt_real, run_experiment, write_bounds, write_results, BoundsRow, ResultRow};
pub use presets::{preset, UnknownPreset, PRESET_NAMES};
