//! Config-driven verification jobs for `heyde-core`.

pub mod config;
pub mod job;
pub mod report;

pub use config::{parse_config, Command, ConfigError, DistSpec, ErrorKind, JobConfig};
pub use job::{run, run_text, Job, Overrides};
pub use report::{Report, Verdict};
