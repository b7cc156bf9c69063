//! Command-line driver: run configuration, bundled study presets, check
//! orchestration and report/plot emission.

pub mod commands;
pub mod config;
pub mod presets;
pub mod report;
pub mod svg;

pub use commands::{cmd_check, cmd_generate, cmd_report, exit_code, run_checks};
pub use config::RunConfig;
pub use report::{Report, Summary};
