pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use args::{Cli, Command};
pub use config::{parse_config, parse_config_str, ScenarioConfig};
pub use error::CliError;
pub use run::{run, run_cli, RunReport};
