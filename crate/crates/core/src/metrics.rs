//! Per-realization performance measures.

use serde::{Deserialize, Serialize};

/// Power consumed by one RF chain, in watts.
pub const RF_CHAIN_POWER_W: f64 = 0.25;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub per_ue_rates: Vec<f64>,
    pub sum_rate: f64,
    /// `None` when every rate is zero.
    pub jain: Option<f64>,
    pub rate_gap: f64,
    pub energy_efficiency: f64,
}

impl MetricRecord {
    /// Panics on an empty rate vector.
    pub fn from_rates(rates: &[f64], p_t_w: f64, n_rf: usize, p_rf_w: f64) -> Self {
        let sum = sum_rate(rates);
        Self {
            per_ue_rates: rates.to_vec(),
            sum_rate: sum,
            jain: jain_index(rates),
            rate_gap: rate_gap(rates),
            energy_efficiency: energy_efficiency(sum, p_t_w, n_rf, p_rf_w),
        }
    }

    pub fn min_rate(&self) -> f64 {
        self.per_ue_rates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn sum_rate(rates: &[f64]) -> f64 {
    assert!(!rates.is_empty(), "at least one UE is required");
    rates.iter().sum()
}

/// `(sum R)^2 / (K sum R^2)`, undefined when all rates vanish.
pub fn jain_index(rates: &[f64]) -> Option<f64> {
    assert!(!rates.is_empty(), "at least one UE is required");
    let sq: f64 = rates.iter().map(|r| r * r).sum();
    if sq <= 0.0 {
        return None;
    }
    let s: f64 = rates.iter().sum();
    Some(s * s / (rates.len() as f64 * sq))
}

pub fn rate_gap(rates: &[f64]) -> f64 {
    assert!(!rates.is_empty(), "at least one UE is required");
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Sum-rate over the total consumed power `P_T + N_RF * P_RF` (bps/Hz/W).
pub fn energy_efficiency(sum_rate: f64, p_t_w: f64, n_rf: usize, p_rf_w: f64) -> f64 {
    sum_rate / (p_t_w + n_rf as f64 * p_rf_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sum_rate_examples() {
        assert_eq!(sum_rate(&[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(sum_rate(&[(1.0f64 + 1.0).log2()]), 1.0);
    }

    #[test]
    #[should_panic]
    fn sum_rate_rejects_empty() {
        sum_rate(&[]);
    }

    #[test]
    fn jain_examples() {
        assert!((jain_index(&[3.0; 5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((jain_index(&[0.0, 0.0, 7.0, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((jain_index(&[2.0, 4.0]).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(jain_index(&[0.0, 0.0]), None);
    }

    #[test]
    fn rate_gap_examples() {
        assert_eq!(rate_gap(&[1.5, 1.5]), 0.0);
        assert_eq!(rate_gap(&[2.0, 4.0]), 2.0);
        assert_eq!(rate_gap(&[3.0]), 0.0);
    }

    #[test]
    fn energy_efficiency_examples() {
        let ee = energy_efficiency(108.9, dbm_to_watts(30.0), 16, RF_CHAIN_POWER_W);
        assert!((ee - 21.78).abs() < 1e-12);
        assert!((ee / 21.6 - 1.0).abs() < 0.01);
        assert_eq!(energy_efficiency(0.0, 1.0, 16, 0.25), 0.0);
        let a = energy_efficiency(50.0, 1.0, 16, 0.25);
        let b = energy_efficiency(50.0, 1.0, 32, 0.25);
        assert!(b < a && b > a / 2.0);
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(40.0) - 10.0).abs() < 1e-12);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((watts_to_dbm(dbm_to_watts(17.3)) - 17.3).abs() < 1e-12);
    }

    #[test]
    fn record_is_consistent() {
        let rates = [1.0, 2.5, 0.5];
        let r = MetricRecord::from_rates(&rates, 1.0, 16, 0.25);
        assert!((r.sum_rate - 4.0).abs() < 1e-12);
        assert_eq!(r.rate_gap, 2.0);
        assert_eq!(r.energy_efficiency, r.sum_rate / 5.0);
        assert_eq!(r.min_rate(), 0.5);
    }

    proptest! {
        #[test]
        fn jain_is_bounded_and_scale_free(
            rates in prop::collection::vec(0.01f64..50.0, 1..12),
            c in 0.01f64..100.0,
        ) {
            let j = jain_index(&rates).unwrap();
            let k = rates.len() as f64;
            prop_assert!(j >= 1.0 / k - 1e-12 && j <= 1.0 + 1e-12);
            let scaled: Vec<f64> = rates.iter().map(|r| r * c).collect();
            prop_assert!((jain_index(&scaled).unwrap() - j).abs() < 1e-12);
        }
    }
}
