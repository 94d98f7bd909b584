//! File formats, sweeps and command-line plumbing around
//! [`partagree_core`].

pub mod config;
pub mod format;
pub mod sweep;
pub mod trace;

pub use config::{load_scenario, load_scenario_str, parse_scenario, ConfigError, ScenarioFile, SweepSpec};
pub use trace::{format_trace, parse_trace, verify_trace};
