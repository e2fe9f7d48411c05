//! The `webtv` command: serve the CMS, run the cost experiments and seed
//! demo data.

pub mod config;
pub mod cost;
pub mod error;
pub mod seed;
pub mod serve;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::FileConfig;
pub use error::CliError;
pub use seed::{seed_demo, SeedReport};
pub use serve::{serve_on, ServeArgs, ServeSettings};

#[derive(Debug, Parser)]
#[command(
    name = "webtv",
    version,
    about = "User-centric IPTV content management system"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service until interrupted.
    Serve(ServeArgs),
    /// Write the per-rank cost experiment as CSV.
    CostExperiment(cost::CostArgs),
    /// Simulate per-step server cost for a schedule of operations.
    Timeline(cost::TimelineArgs),
    /// Install demo fixtures, device profiles and the demo user.
    SeedDemo(SeedArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Data directory; overrides the config file.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Serve(args) => {
            let settings = ServeSettings::resolve(&args, &config);
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| CliError::Runtime(format!("cannot start runtime: {e}")))?;
            runtime.block_on(serve::serve(settings))
        }
        Command::CostExperiment(args) => cost::cost_experiment(&args, &config),
        Command::Timeline(args) => cost::timeline(&args, &config),
        Command::SeedDemo(args) => {
            let dir = args.data_dir.unwrap_or(config.cms.data_dir);
            let report = seed_demo(&dir)?;
            println!(
                "seeded {}: {} device profiles, {} media fixtures, user {}",
                report.data_dir.display(),
                report.profiles,
                report.media_files.len(),
                seed::DEMO_USER
            );
            Ok(())
        }
    }
}
