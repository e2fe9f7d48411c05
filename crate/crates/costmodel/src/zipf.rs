use crate::error::{CostError, Result};
use crate::params::CostParams;
use crate::sum::CompensatedSum;

/// Normalizing constant of the Zipf-like law: the reciprocal of
/// `sum_{r=1..n} r^-exponent`, accumulated in ascending rank order.
pub fn zipf_constant(content_count: usize, exponent: f64) -> Result<f64> {
    if content_count == 0 {
        return Err(CostError::EmptyCatalog);
    }
    let harmonic: CompensatedSum = (1..=content_count)
        .map(|r| (r as f64).powf(-exponent))
        .collect();
    Ok(1.0 / harmonic.total())
}

/// Access probability of the item at `rank` under `params`.
pub fn access_probability(rank: usize, params: &CostParams) -> Result<f64> {
    ZipfPopularity::new(params.content_count, params.zipf_exponent)?.probability(rank)
}

/// A Zipf-like popularity law with its normalizer computed once.
#[derive(Debug, Clone, Copy)]
pub struct ZipfPopularity {
    content_count: usize,
    exponent: f64,
    constant: f64,
}

impl ZipfPopularity {
    pub fn new(content_count: usize, exponent: f64) -> Result<Self> {
        Ok(Self {
            content_count,
            exponent,
            constant: zipf_constant(content_count, exponent)?,
        })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn content_count(&self) -> usize {
        self.content_count
    }

    pub fn probability(&self, rank: usize) -> Result<f64> {
        if rank == 0 || rank > self.content_count {
            return Err(CostError::RankOutOfRange {
                rank,
                content_count: self.content_count,
            });
        }
        Ok(self.constant / (rank as f64).powf(self.exponent))
    }

    /// Probabilities for ranks `1..=content_count`, in rank order.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.content_count).map(move |r| self.constant / (r as f64).powf(self.exponent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_item_catalog_has_unit_constant() {
        for delta in [0.0, 0.271, 1.0, 3.5] {
            assert_eq!(zipf_constant(1, delta).unwrap(), 1.0);
        }
    }

    #[test]
    fn two_items_with_unit_exponent() {
        let c = zipf_constant(2, 1.0).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_catalog_is_a_domain_error() {
        assert!(matches!(
            zipf_constant(0, 0.5),
            Err(CostError::EmptyCatalog)
        ));
    }

    #[test]
    fn default_constant_matches_frozen_oracle() {
        // 40-digit direct summation over r = 1..1000 with delta = 0.271.
        let oracle = 0.004_756_875_363_499_931;
        let c = zipf_constant(1000, 0.271).unwrap();
        assert!(((c - oracle) / oracle).abs() < 1e-12, "{c}");
    }

    #[test]
    fn first_rank_equals_constant_and_last_rank_matches_oracle() {
        let params = CostParams::default();
        let c = zipf_constant(1000, 0.271).unwrap();
        assert_eq!(access_probability(1, &params).unwrap(), c);
        let last = access_probability(1000, &params).unwrap();
        let oracle = 7.316_809_913_710_604e-4;
        assert!(((last - oracle) / oracle).abs() < 1e-12, "{last}");
    }

    #[test]
    fn out_of_range_ranks_are_rejected() {
        let params = CostParams::default();
        assert!(matches!(
            access_probability(0, &params),
            Err(CostError::RankOutOfRange { rank: 0, .. })
        ));
        assert!(access_probability(1001, &params).is_err());
    }

    #[test]
    fn zero_exponent_is_uniform() {
        let z = ZipfPopularity::new(8, 0.0).unwrap();
        for p in z.probabilities() {
            assert!((p - 0.125).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(n in 1usize..=10_000, delta in 0.0f64..=2.0) {
            let z = ZipfPopularity::new(n, delta).unwrap();
            let total: CompensatedSum = z.probabilities().collect();
            prop_assert!((total.total() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn probabilities_strictly_decrease_for_positive_exponent(n in 2usize..=500, delta in 0.01f64..=2.0) {
            let z = ZipfPopularity::new(n, delta).unwrap();
            let ps: Vec<f64> = z.probabilities().collect();
            for w in ps.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }
    }
}
