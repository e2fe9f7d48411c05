//! Cost laboratory for three-screen content delivery.
//!
//! Models content popularity with a Zipf-like law and compares the
//! normalized server cost of a pre-encoding syndication system (CANSS,
//! which aggregates, transcodes every device variant and deploys in one
//! sequential run) against the user-centric scheme, where aggregation,
//! mediation and deployment are independent operations triggered by
//! user requests.
//!
//! The "density" and "cumulative" curves produced here are expected-cost
//! curves: they scale the access probability of each rank by the number of
//! subscribers and the per-scenario cost, so the cumulative curve at the
//! last rank equals `subscribers * scenario_cost` rather than one.

mod error;
mod experiment;
mod format;
mod params;
mod scenario;
mod sum;
mod timeline;
mod zipf;

pub use error::{CostError, Result};
pub use experiment::{
    experiment_rows, run_cost_experiment, scenario_totals, write_experiment_csv, ExperimentRow,
    CSV_HEADER,
};
pub use format::format_sig9;
pub use params::CostParams;
pub use scenario::{cost_mass, cumulative_cost, scenario_cost, Scenario, SystemKind};
pub use sum::CompensatedSum;
pub use timeline::{
    parse_schedule, simulate_timeline, write_timeline_csv, MediationShare, Operation,
    TimelineEvent, TimelineSample,
};
pub use zipf::{access_probability, zipf_constant, ZipfPopularity};
