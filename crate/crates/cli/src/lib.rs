//! Batch runner and reporter for the evaluation environment.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{BackendProfile, BackendProfiles, EpisodeSettings, RunConfig};
pub use report::{report, report_and_write, RunReport};
pub use runner::{replay_gt, run, validate_scenario, RunManifest};
