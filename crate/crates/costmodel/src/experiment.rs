use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::format::format_sig9;
use crate::params::CostParams;
use crate::scenario::{cumulative_cost, scenario_cost, Scenario, SystemKind};
use crate::sum::CompensatedSum;
use crate::zipf::ZipfPopularity;

pub const CSV_HEADER: &str = "rank,system,scenario,cost_mass,cumulative_cost";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub rank: usize,
    pub system: SystemKind,
    pub scenario: Scenario,
    pub cost_mass: f64,
    pub cumulative_cost: f64,
}

/// All rows of the experiment: systems outermost, then scenarios, then
/// ranks in ascending order.
pub fn experiment_rows(params: &CostParams) -> Result<Vec<ExperimentRow>> {
    params.validate()?;
    let zipf = ZipfPopularity::new(params.content_count, params.zipf_exponent)?;
    let probabilities: Vec<f64> = zipf.probabilities().collect();
    let subscribers = params.subscribers as f64;

    let mut rows = Vec::with_capacity(6 * params.content_count);
    for system in SystemKind::ALL {
        for scenario in Scenario::ALL {
            let cost = scenario_cost(system, scenario, params);
            let mut mass = CompensatedSum::new();
            for (idx, &p) in probabilities.iter().enumerate() {
                mass.add(p);
                rows.push(ExperimentRow {
                    rank: idx + 1,
                    system,
                    scenario,
                    cost_mass: p * subscribers * cost,
                    cumulative_cost: mass.total() * subscribers * cost,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes the experiment as CSV and returns the number of data rows.
pub fn run_cost_experiment<W: Write>(params: &CostParams, out: W) -> Result<usize> {
    let rows = experiment_rows(params)?;
    write_experiment_csv(&rows, out)?;
    Ok(rows.len())
}

/// Writes rows under [`CSV_HEADER`], values with nine significant digits.
pub fn write_experiment_csv<W: Write>(rows: &[ExperimentRow], mut out: W) -> Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.rank,
            row.system,
            row.scenario.index(),
            format_sig9(row.cost_mass),
            format_sig9(row.cumulative_cost)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Full-catalog cumulative cost for each (system, scenario) pair.
pub fn scenario_totals(params: &CostParams) -> Result<Vec<(SystemKind, Scenario, f64)>> {
    let mut totals = Vec::with_capacity(6);
    for system in SystemKind::ALL {
        for scenario in Scenario::ALL {
            totals.push((
                system,
                scenario,
                cumulative_cost(params.content_count, system, scenario, params)?,
            ));
        }
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::cost_mass;
    use std::collections::HashMap;

    #[test]
    fn default_experiment_has_6000_rows_and_header() {
        let mut buf = Vec::new();
        let n = run_cost_experiment(&CostParams::default(), &mut buf).unwrap();
        assert_eq!(n, 6000);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 6000);
        assert!(!text.contains('\r'));
        assert!(text.starts_with("rank,system,scenario,cost_mass,cumulative_cost\n1,canss,1,"));
    }

    #[test]
    fn single_item_catalog_rows_have_equal_mass_and_cumulative() {
        let p = CostParams {
            content_count: 1,
            ..Default::default()
        };
        let rows = experiment_rows(&p).unwrap();
        assert_eq!(rows.len(), 6);
        for r in rows {
            assert_eq!(r.cost_mass, r.cumulative_cost);
        }
    }

    #[test]
    fn rows_agree_with_pointwise_functions() {
        let p = CostParams {
            content_count: 50,
            ..Default::default()
        };
        for row in experiment_rows(&p).unwrap() {
            let mass = cost_mass(row.rank, row.system, row.scenario, &p).unwrap();
            let cum = cumulative_cost(row.rank, row.system, row.scenario, &p).unwrap();
            assert!((row.cost_mass - mass).abs() <= 1e-12 * mass.max(1.0));
            assert!((row.cumulative_cost - cum).abs() <= 1e-12 * cum.max(1.0));
        }
    }

    #[test]
    fn proposed_never_exceeds_canss() {
        let rows = experiment_rows(&CostParams::default()).unwrap();
        let canss: HashMap<(usize, Scenario), ExperimentRow> = rows
            .iter()
            .filter(|r| r.system == SystemKind::Canss)
            .map(|r| ((r.rank, r.scenario), *r))
            .collect();
        for r in rows.iter().filter(|r| r.system == SystemKind::Proposed) {
            let c = canss[&(r.rank, r.scenario)];
            assert!(r.cost_mass <= c.cost_mass);
            assert!(r.cumulative_cost <= c.cumulative_cost);
        }
    }

    #[test]
    fn output_is_deterministic() {
        let p = CostParams::default();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_cost_experiment(&p, &mut a).unwrap();
        run_cost_experiment(&p, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn totals_under_defaults() {
        let totals = scenario_totals(&CostParams::default()).unwrap();
        let expected = [4400.0, 13000.0, 30000.0, 4400.0, 7500.0, 12000.0];
        for ((_, _, got), want) in totals.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
        }
    }
}
