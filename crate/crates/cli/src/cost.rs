use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use webtv_costmodel::{
    experiment_rows, format_sig9, parse_schedule, scenario_totals, simulate_timeline,
    write_experiment_csv, write_timeline_csv, CostParams, SystemKind,
};

use crate::config::FileConfig;
use crate::error::CliError;

/// Cost model parameter overrides; unset flags keep the config file or
/// default values.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// Number of ranked content items.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Number of subscribers.
    #[arg(long = "U")]
    pub u: Option<u64>,
    /// Zipf exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long = "c-agg", allow_negative_numbers = true)]
    pub c_agg: Option<f64>,
    #[arg(long = "c-med", allow_negative_numbers = true)]
    pub c_med: Option<f64>,
    #[arg(long = "c-dep", allow_negative_numbers = true)]
    pub c_dep: Option<f64>,
    /// PC to iPad mediation share.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// PC to iPhone mediation share.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// iPad to iPhone mediation share.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Per-step idle cost of a timeline.
    #[arg(long, allow_negative_numbers = true)]
    pub idle: Option<f64>,
}

impl ParamFlags {
    pub fn resolve(&self, config: &FileConfig) -> Result<CostParams, CliError> {
        let mut p = CostParams::default();
        config.cost.apply(&mut p);
        let f = self;
        if let Some(v) = f.n {
            p.content_count = v;
        }
        if let Some(v) = f.u {
            p.subscribers = v;
        }
        if let Some(v) = f.delta {
            p.zipf_exponent = v;
        }
        if let Some(v) = f.c_agg {
            p.aggregation_cost = v;
        }
        if let Some(v) = f.c_med {
            p.mediation_cost = v;
        }
        if let Some(v) = f.c_dep {
            p.deployment_cost = v;
        }
        if let Some(v) = f.alpha {
            p.pc_to_ipad_share = v;
        }
        if let Some(v) = f.beta {
            p.pc_to_iphone_share = v;
        }
        if let Some(v) = f.gamma {
            p.ipad_to_iphone_share = v;
        }
        if let Some(v) = f.idle {
            p.idle_cost = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only emit rows of this system (canss or proposed).
    #[arg(long)]
    pub system: Option<SystemKind>,
    /// Also print the full-catalog total of each system and scenario.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TimelineArgs {
    /// Schedule CSV with `step,operation` rows.
    #[arg(long)]
    pub schedule: PathBuf,
    /// System whose costs to simulate (canss or proposed).
    #[arg(long)]
    pub system: SystemKind,
    /// Number of steps to simulate.
    #[arg(long, default_value_t = 10)]
    pub horizon: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamFlags,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Runtime(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn cost_experiment(args: &CostArgs, config: &FileConfig) -> Result<(), CliError> {
    let params = args.params.resolve(config)?;
    let mut rows = experiment_rows(&params)?;
    if let Some(system) = args.system {
        rows.retain(|r| r.system == system);
    }
    write_experiment_csv(&rows, open_out(args.out.as_deref())?)?;

    if args.summary {
        let mut text = String::from("system,scenario,total_cost\n");
        for (system, scenario, total) in scenario_totals(&params)? {
            if args.system.is_none_or(|s| s == system) {
                text.push_str(&format!(
                    "{system},{},{}\n",
                    scenario.index(),
                    format_sig9(total)
                ));
            }
        }
        let written = if args.out.is_some() {
            io::stdout().lock().write_all(text.as_bytes())
        } else {
            io::stderr().lock().write_all(text.as_bytes())
        };
        written.map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

pub fn timeline(args: &TimelineArgs, config: &FileConfig) -> Result<(), CliError> {
    let params = args.params.resolve(config)?;
    let text = std::fs::read_to_string(&args.schedule).map_err(|e| {
        CliError::Config(format!(
            "cannot read schedule {}: {e}",
            args.schedule.display()
        ))
    })?;
    let events = parse_schedule(&text)?;
    let samples = simulate_timeline(&events, args.system, args.horizon, &params)?;
    write_timeline_csv(&samples, open_out(args.out.as_deref())?)?;
    Ok(())
}
