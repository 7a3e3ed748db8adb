//! Experiment drivers, their JSON configuration and file output.

pub mod attraction;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod output;
pub mod shooting;
pub mod validate;

pub use attraction::{attraction_demo, AttractionReport};
pub use config::{GridSpec, RunConfig};
pub use shooting::{shoot_backward, BisectReport, Pipeline, Shooter, ShootingReport, TrajectoryRow, Verdicts};
pub use cli::cli;
