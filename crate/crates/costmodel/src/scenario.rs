use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CostError, Result};
use crate::params::CostParams;
use crate::sum::CompensatedSum;
use crate::zipf::ZipfPopularity;

/// Which content management scheme is being costed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Pre-encoding syndication: every bundle is aggregated, transcoded and
    /// deployed as one sequential run.
    Canss,
    /// User-centric scheme: one aggregation, mediations on demand, one
    /// deployment per delivered variant.
    Proposed,
}

impl SystemKind {
    pub const ALL: [SystemKind; 2] = [SystemKind::Canss, SystemKind::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Canss => "canss",
            SystemKind::Proposed => "proposed",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "canss" => Ok(SystemKind::Canss),
            "proposed" => Ok(SystemKind::Proposed),
            other => Err(CostError::InvalidParams(format!(
                "unknown system `{other}` (expected canss or proposed)"
            ))),
        }
    }
}

/// Three-screen service scenario, indexed 1 to 3.
///
/// Scenario 1 only needs the iPad to iPhone conversion, scenario 2 adds
/// PC to iPhone, scenario 3 adds PC to iPad as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    IpadToIphone,
    ToIphone,
    AllScreens,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::IpadToIphone,
        Scenario::ToIphone,
        Scenario::AllScreens,
    ];

    pub fn index(self) -> u8 {
        match self {
            Scenario::IpadToIphone => 1,
            Scenario::ToIphone => 2,
            Scenario::AllScreens => 3,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Scenario::IpadToIphone),
            2 => Ok(Scenario::ToIphone),
            3 => Ok(Scenario::AllScreens),
            other => Err(CostError::InvalidParams(format!(
                "scenario index {other} outside 1..=3"
            ))),
        }
    }

    /// Number of mediations (and, for the proposed scheme, deployments)
    /// the scenario requires.
    fn mediation_count(self) -> f64 {
        f64::from(self.index())
    }

    fn share(self, params: &CostParams) -> f64 {
        match self {
            Scenario::IpadToIphone => params.ipad_to_iphone_share,
            Scenario::ToIphone => params.pc_to_iphone_share + params.ipad_to_iphone_share,
            Scenario::AllScreens => params.total_share(),
        }
    }
}

/// Normalized cost of serving one scenario under `system`.
pub fn scenario_cost(system: SystemKind, scenario: Scenario, params: &CostParams) -> f64 {
    let mediation = params.mediation_cost * scenario.share(params);
    let k = scenario.mediation_count();
    match system {
        SystemKind::Canss => k * (params.aggregation_cost + mediation + params.deployment_cost),
        SystemKind::Proposed => params.aggregation_cost + mediation + params.deployment_cost * k,
    }
}

/// Expected cost contributed by the item at `rank`:
/// `P_rank * subscribers * scenario_cost`.
pub fn cost_mass(
    rank: usize,
    system: SystemKind,
    scenario: Scenario,
    params: &CostParams,
) -> Result<f64> {
    params.validate()?;
    let zipf = ZipfPopularity::new(params.content_count, params.zipf_exponent)?;
    Ok(zipf.probability(rank)?
        * params.subscribers as f64
        * scenario_cost(system, scenario, params))
}

/// Expected cost accumulated over ranks `1..=bound`.
pub fn cumulative_cost(
    bound: usize,
    system: SystemKind,
    scenario: Scenario,
    params: &CostParams,
) -> Result<f64> {
    params.validate()?;
    if bound == 0 || bound > params.content_count {
        return Err(CostError::RankOutOfRange {
            rank: bound,
            content_count: params.content_count,
        });
    }
    let zipf = ZipfPopularity::new(params.content_count, params.zipf_exponent)?;
    // Scale after summing: the probability mass over the full catalog is one.
    let mass: CompensatedSum = zipf.probabilities().take(bound).collect();
    Ok(mass.total() * params.subscribers as f64 * scenario_cost(system, scenario, params))
}
