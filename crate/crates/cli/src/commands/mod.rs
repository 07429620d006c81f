pub mod dominance;
pub mod eb_demo;
pub mod estimate;
pub mod risk_curve;
pub mod sample_model;

use std::path::PathBuf;

use clap::Args;

use crate::output::Format;

/// Flags shared by every command.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated output formats; all three when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
}
