//! Batch front end for `wavectl-core`: configuration parsing, command
//! execution and report/CSV output.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, ProblemConfig};
pub use report::{RunReport, Status};
pub use run::{run, Command, Options};

/// Environment variable naming the default tolerance profile.
pub const PROFILE_ENV: &str = "WAVECTL_TOLERANCE_PROFILE";

/// Tolerance profile selected by [`PROFILE_ENV`], `default` when unset.
pub fn profile_from_env() -> Result<wavectl_core::Tolerances, String> {
    let name = std::env::var(PROFILE_ENV).unwrap_or_else(|_| "default".into());
    wavectl_core::Tolerances::profile(&name).ok_or_else(|| format!("{PROFILE_ENV}: unknown profile {name:?}"))
}
