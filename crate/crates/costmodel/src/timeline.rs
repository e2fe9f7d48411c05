//! Step-by-step server cost of a workload under either system.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CostError, Result};
use crate::format::format_sig9;
use crate::params::CostParams;
use crate::scenario::SystemKind;

/// One of the three transcoding paths, each with its own load share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MediationShare {
    /// PC to iPad (alpha).
    PcToIpad,
    /// PC to iPhone (beta).
    PcToIphone,
    /// iPad to iPhone (gamma).
    IpadToIphone,
}

impl MediationShare {
    pub fn share(self, params: &CostParams) -> f64 {
        match self {
            MediationShare::PcToIpad => params.pc_to_ipad_share,
            MediationShare::PcToIphone => params.pc_to_iphone_share,
            MediationShare::IpadToIphone => params.ipad_to_iphone_share,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operation {
    Aggregation,
    Mediation(MediationShare),
    Deployment,
}

impl Operation {
    /// Cost of running this operation on its own.
    pub fn standalone_cost(self, params: &CostParams) -> f64 {
        match self {
            Operation::Aggregation => params.aggregation_cost,
            Operation::Mediation(s) => params.mediation_cost * s.share(params),
            Operation::Deployment => params.deployment_cost,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Aggregation => "agg",
            Operation::Mediation(MediationShare::PcToIpad) => "med-alpha",
            Operation::Mediation(MediationShare::PcToIphone) => "med-beta",
            Operation::Mediation(MediationShare::IpadToIphone) => "med-gamma",
            Operation::Deployment => "dep",
        }
    }
}

impl FromStr for Operation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "agg" => Ok(Operation::Aggregation),
            "med-alpha" => Ok(Operation::Mediation(MediationShare::PcToIpad)),
            "med-beta" => Ok(Operation::Mediation(MediationShare::PcToIphone)),
            "med-gamma" => Ok(Operation::Mediation(MediationShare::IpadToIphone)),
            "dep" => Ok(Operation::Deployment),
            other => Err(format!(
                "unknown operation `{other}` (expected agg, med-alpha, med-beta, med-gamma or dep)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub time: u64,
    pub operation: Operation,
}

impl TimelineEvent {
    pub fn new(time: u64, operation: Operation) -> Self {
        Self { time, operation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineSample {
    pub step: u64,
    pub cost: f64,
}

/// Simulates `horizon` steps of server cost.
///
/// Every step carries the idle cost. Under the proposed scheme each event
/// adds its own operation cost at its own step. Under CANSS the whole
/// chain runs at aggregation time: each aggregation adds the aggregation
/// cost, the mediation cost of every mediation attributed to it and one
/// deployment cost, while the attributed mediation and deployment events
/// add nothing at their own steps. A mediation or deployment is attributed
/// to the latest aggregation at or before it, or to the earliest
/// aggregation when none precedes it. Without any aggregation in the
/// workload CANSS charges events where they occur.
pub fn simulate_timeline(
    events: &[TimelineEvent],
    system: SystemKind,
    horizon: u64,
    params: &CostParams,
) -> Result<Vec<TimelineSample>> {
    params.validate()?;
    if let Some(e) = events.iter().find(|e| e.time >= horizon) {
        return Err(CostError::EventBeyondHorizon {
            time: e.time,
            horizon,
        });
    }

    let mut costs = vec![params.idle_cost; horizon as usize];

    let mut aggregation_steps: Vec<u64> = events
        .iter()
        .filter(|e| e.operation == Operation::Aggregation)
        .map(|e| e.time)
        .collect();
    aggregation_steps.sort_unstable();

    if system == SystemKind::Proposed || aggregation_steps.is_empty() {
        for e in events {
            costs[e.time as usize] += e.operation.standalone_cost(params);
        }
    } else {
        for &t in &aggregation_steps {
            costs[t as usize] += params.aggregation_cost + params.deployment_cost;
        }
        for e in events {
            if let Operation::Mediation(share) = e.operation {
                let owner = aggregation_steps
                    .iter()
                    .rev()
                    .find(|&&t| t <= e.time)
                    .unwrap_or(&aggregation_steps[0]);
                costs[*owner as usize] += params.mediation_cost * share.share(params);
            }
        }
    }

    Ok(costs
        .into_iter()
        .enumerate()
        .map(|(step, cost)| TimelineSample {
            step: step as u64,
            cost,
        })
        .collect())
}

/// Parses a `step,operation` schedule. A leading header row, blank lines
/// and `#` comments are ignored.
pub fn parse_schedule(text: &str) -> Result<Vec<TimelineEvent>> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (step, op) = line.split_once(',').ok_or_else(|| CostError::Schedule {
            line: line_no,
            message: "expected `step,operation`".into(),
        })?;
        if events.is_empty() && step.trim() == "step" {
            continue;
        }
        let time = step
            .trim()
            .parse::<u64>()
            .map_err(|e| CostError::Schedule {
                line: line_no,
                message: format!("bad step `{}`: {e}", step.trim()),
            })?;
        let operation = op
            .parse::<Operation>()
            .map_err(|message| CostError::Schedule {
                line: line_no,
                message,
            })?;
        events.push(TimelineEvent { time, operation });
    }
    Ok(events)
}

pub fn write_timeline_csv<W: Write>(samples: &[TimelineSample], mut out: W) -> Result<()> {
    out.write_all(b"step,cost\n")?;
    for s in samples {
        writeln!(out, "{},{}", s.step, format_sig9(s.cost))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bundled_workload() -> Vec<TimelineEvent> {
        vec![
            TimelineEvent::new(0, Operation::Aggregation),
            TimelineEvent::new(2, Operation::Mediation(MediationShare::PcToIpad)),
            TimelineEvent::new(4, Operation::Mediation(MediationShare::PcToIphone)),
            TimelineEvent::new(6, Operation::Mediation(MediationShare::IpadToIphone)),
            TimelineEvent::new(8, Operation::Deployment),
        ]
    }

    #[test]
    fn idle_only() {
        let p = CostParams::default();
        let s = simulate_timeline(&[], SystemKind::Canss, 5, &p).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| x.cost == 0.1));
    }

    #[test]
    fn canss_spikes_once_at_aggregation() {
        let p = CostParams::default();
        let s = simulate_timeline(&bundled_workload(), SystemKind::Canss, 10, &p).unwrap();
        assert!((s[0].cost - 1.1).abs() < 1e-12);
        for x in &s[1..] {
            assert_eq!(x.cost, 0.1);
        }
    }

    #[test]
    fn proposed_charges_operations_where_they_happen() {
        let p = CostParams::default();
        let events = [
            TimelineEvent::new(0, Operation::Aggregation),
            TimelineEvent::new(3, Operation::Mediation(MediationShare::PcToIpad)),
        ];
        let s = simulate_timeline(&events, SystemKind::Proposed, 5, &p).unwrap();
        assert!((s[0].cost - 0.3).abs() < 1e-12);
        assert!((s[3].cost - 0.45).abs() < 1e-12);
        assert_eq!(s[1].cost, 0.1);
        assert_eq!(s[4].cost, 0.1);
    }

    #[test]
    fn events_past_horizon_are_rejected() {
        let p = CostParams::default();
        let events = [TimelineEvent::new(5, Operation::Deployment)];
        assert!(matches!(
            simulate_timeline(&events, SystemKind::Proposed, 5, &p),
            Err(CostError::EventBeyondHorizon {
                time: 5,
                horizon: 5
            })
        ));
    }

    #[test]
    fn mediation_before_first_aggregation_is_attributed_to_it() {
        let p = CostParams::default();
        let events = [
            TimelineEvent::new(1, Operation::Mediation(MediationShare::PcToIphone)),
            TimelineEvent::new(3, Operation::Aggregation),
        ];
        let s = simulate_timeline(&events, SystemKind::Canss, 5, &p).unwrap();
        assert_eq!(s[1].cost, 0.1);
        assert!((s[3].cost - (0.1 + 0.2 + 0.21 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn schedule_parsing() {
        let text = "step,operation\n0,agg\n\n# comment\n3,med-alpha\n4,dep\n";
        let events = parse_schedule(text).unwrap();
        assert_eq!(
            events,
            vec![
                TimelineEvent::new(0, Operation::Aggregation),
                TimelineEvent::new(3, Operation::Mediation(MediationShare::PcToIpad)),
                TimelineEvent::new(4, Operation::Deployment),
            ]
        );
        assert!(matches!(
            parse_schedule("0,agg\n1,transcode\n"),
            Err(CostError::Schedule { line: 2, .. })
        ));
        assert!(parse_schedule("x,agg\n").is_err());
        assert!(parse_schedule("0 agg\n").is_err());
    }

    #[test]
    fn csv_rendering() {
        let p = CostParams::default();
        let s = simulate_timeline(&bundled_workload(), SystemKind::Canss, 3, &p);
        assert!(s.is_err());
        let s = simulate_timeline(&bundled_workload()[..1], SystemKind::Canss, 3, &p).unwrap();
        let mut buf = Vec::new();
        write_timeline_csv(&s, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,cost\n0,0.4\n1,0.1\n2,0.1\n"
        );
    }

    fn arb_operation() -> impl Strategy<Value = Operation> {
        prop_oneof![
            Just(Operation::Aggregation),
            Just(Operation::Mediation(MediationShare::PcToIpad)),
            Just(Operation::Mediation(MediationShare::PcToIphone)),
            Just(Operation::Mediation(MediationShare::IpadToIphone)),
            Just(Operation::Deployment),
        ]
    }

    proptest! {
        #[test]
        fn proposed_conserves_event_costs(
            horizon in 1u64..60,
            raw in proptest::collection::vec((0u64..1000, arb_operation()), 0..30),
        ) {
            let p = CostParams::default();
            let events: Vec<TimelineEvent> = raw
                .into_iter()
                .map(|(t, op)| TimelineEvent::new(t % horizon, op))
                .collect();
            let series = simulate_timeline(&events, SystemKind::Proposed, horizon, &p).unwrap();
            let total: f64 = series.iter().map(|s| s.cost).sum();
            let expected: f64 = events.iter().map(|e| e.operation.standalone_cost(&p)).sum();
            prop_assert!((total - horizon as f64 * p.idle_cost - expected).abs() < 1e-9);
        }
    }
}
