use serde::{Deserialize, Serialize};

use crate::error::{CostError, Result};

/// Constants driving every cost computation.
///
/// Mediation shares are the normalized server loads of the three
/// transcoding paths: PC to iPad, PC to iPhone and iPad to iPhone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CostParams {
    /// Number of ranked content items (N).
    pub content_count: usize,
    /// Number of three-screen subscribers (U).
    pub subscribers: u64,
    /// Zipf exponent of the popularity law.
    pub zipf_exponent: f64,
    pub aggregation_cost: f64,
    pub mediation_cost: f64,
    pub deployment_cost: f64,
    pub pc_to_ipad_share: f64,
    pub pc_to_iphone_share: f64,
    pub ipad_to_iphone_share: f64,
    /// Baseline cost charged at every step of a timeline, busy or idle.
    pub idle_cost: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            content_count: 1000,
            subscribers: 10_000,
            zipf_exponent: 0.271,
            aggregation_cost: 0.2,
            mediation_cost: 0.7,
            deployment_cost: 0.1,
            pc_to_ipad_share: 0.5,
            pc_to_iphone_share: 0.3,
            ipad_to_iphone_share: 0.2,
            idle_cost: 0.1,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.content_count == 0 {
            return Err(CostError::EmptyCatalog);
        }
        let non_negative = [
            ("zipf exponent", self.zipf_exponent),
            ("aggregation cost", self.aggregation_cost),
            ("mediation cost", self.mediation_cost),
            ("deployment cost", self.deployment_cost),
            ("alpha", self.pc_to_ipad_share),
            ("beta", self.pc_to_iphone_share),
            ("gamma", self.ipad_to_iphone_share),
            ("idle cost", self.idle_cost),
        ];
        for (name, value) in non_negative {
            if !value.is_finite() || value < 0.0 {
                return Err(CostError::InvalidParams(format!(
                    "{name} must be a finite non-negative number, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Sum of the three mediation shares.
    pub fn total_share(&self) -> f64 {
        self.pc_to_ipad_share + self.pc_to_iphone_share + self.ipad_to_iphone_share
    }
}
