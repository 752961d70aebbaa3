//! Campaign configuration: JSON schema, defaults and validation.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::HarnessError;
use crate::bb_stage::FairnessSpec;
use crate::channel::{ArrayGeometry, ChannelModel, GeometryBounds, GroupAngularSpec, PathlossConvention};
use crate::metrics::RF_CHAIN_POWER_W;
use crate::optimizers::{Algorithm, Hyperparams, OptimizerConfig};

/// Optimizer settings shared by every run of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub n_agents: usize,
    pub iterations: usize,
    pub hyperparams: Hyperparams,
    pub parallel_eval: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            n_agents: 100,
            iterations: 10,
            hyperparams: Hyperparams::default(),
            parallel_eval: false,
        }
    }
}

impl OptimizerSettings {
    pub fn config_for(&self, algorithm: Algorithm, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            n_agents: self.n_agents,
            iterations: self.iterations,
            algorithm,
            hyperparams: self.hyperparams,
            seed,
            parallel_eval: self.parallel_eval,
            initial_points: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub array: ArrayGeometry,
    /// Used only to generate `groups` when they are omitted.
    pub n_groups: usize,
    /// Total UE count `K`; split evenly over generated groups.
    pub n_ues: usize,
    pub groups: Vec<GroupAngularSpec>,
    pub n_rf_per_group: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub p_t_dbm: Vec<f64>,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub pathloss_exponent: f64,
    pub pathloss_convention: PathlossConvention,
    pub n_paths: usize,
    pub geometry: GeometryBounds,
    pub rf_chain_power_w: f64,
    pub algorithms: Vec<Algorithm>,
    #[serde(deserialize_with = "one_or_many")]
    pub fairness: Vec<FairnessSpec>,
    pub optimizer: OptimizerSettings,
    /// Seed every optimizer population with the equal-allocation agent.
    pub inject_baseline: bool,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Worker threads for realizations; 0 uses every available core.
    pub workers: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            array: ArrayGeometry::default(),
            n_groups: 2,
            n_ues: 10,
            groups: Vec::new(),
            n_rf_per_group: 8,
            p_t_dbm: vec![40.0],
            noise_psd_dbm_hz: -174.0,
            bandwidth_hz: 120e3,
            pathloss_exponent: 3.76,
            pathloss_convention: PathlossConvention::Amplitude,
            n_paths: 20,
            geometry: GeometryBounds::default(),
            rf_chain_power_w: RF_CHAIN_POWER_W,
            algorithms: Algorithm::ALL.to_vec(),
            fairness: vec![FairnessSpec::Alpha(0.0)],
            optimizer: OptimizerSettings::default(),
            inject_baseline: false,
            n_realizations: 5000,
            master_seed: 0,
            workers: 0,
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw<T> {
        Many(Vec<T>),
        One(T),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Many(v) => v,
        Raw::One(x) => vec![x],
    })
}

/// Groups at elevation 50 deg with azimuths `25 + (360/G) g` deg and 10 deg
/// spreads; `K` is split evenly with the remainder on the first groups.
pub fn default_groups(n_groups: usize, n_ues: usize) -> Vec<GroupAngularSpec> {
    (0..n_groups)
        .map(|g| GroupAngularSpec {
            mean_eaod_deg: 50.0,
            eaod_spread_deg: 10.0,
            mean_aaod_deg: 25.0 + 360.0 / n_groups as f64 * g as f64,
            aaod_spread_deg: 10.0,
            ue_count: n_ues / n_groups + usize::from(g < n_ues % n_groups),
        })
        .collect()
}

fn invalid<T>(field: &str, msg: impl std::fmt::Display) -> Result<T, HarnessError> {
    Err(HarnessError::Config(format!("{field}: {msg}")))
}

impl SystemConfig {
    /// Table-I defaults with `n_ues` UEs over `n_groups` generated groups.
    pub fn with_groups(n_groups: usize, n_ues: usize) -> Self {
        let mut cfg = Self {
            n_groups,
            n_ues,
            ..Self::default()
        };
        cfg.groups = default_groups(n_groups, n_ues);
        cfg
    }

    /// Fills generated groups and syncs the group and UE counts.
    pub fn resolve(&mut self) -> Result<(), HarnessError> {
        if self.groups.is_empty() {
            if self.n_groups == 0 {
                return invalid("n_groups", "at least one group is required");
            }
            if self.n_ues < self.n_groups {
                return invalid("n_ues", "every generated group needs at least one UE");
            }
            self.groups = default_groups(self.n_groups, self.n_ues);
        } else {
            self.n_groups = self.groups.len();
            self.n_ues = self.groups.iter().map(|g| g.ue_count).sum();
        }
        Ok(())
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf_per_group * self.groups.len()
    }

    pub fn channel_model(&self) -> ChannelModel {
        ChannelModel {
            array: self.array,
            groups: self.groups.clone(),
            n_paths: self.n_paths,
            pathloss_exponent: self.pathloss_exponent,
            convention: self.pathloss_convention,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.array.validate().or_else(|e| invalid("array", e))?;
        if self.groups.is_empty() {
            return invalid("groups", "at least one group is required");
        }
        for (g, spec) in self.groups.iter().enumerate() {
            spec.validate(g).or_else(|e| invalid(&format!("groups[{g}]"), e))?;
        }
        if self.n_groups != self.groups.len() {
            return invalid("n_groups", "does not match the number of groups");
        }
        let k: usize = self.groups.iter().map(|g| g.ue_count).sum();
        if self.n_ues != k {
            return invalid("n_ues", format!("{} but the groups hold {k} UEs", self.n_ues));
        }
        if self.n_rf_per_group == 0 {
            return invalid("n_rf_per_group", "must be positive");
        }
        let m = self.array.n_antennas();
        if k > self.n_rf() || self.n_rf() > m {
            return invalid(
                "n_rf_per_group",
                format!("need K <= N_RF <= M, got K = {k}, N_RF = {}, M = {m}", self.n_rf()),
            );
        }
        if let Some(g) = self.groups.iter().position(|g| g.ue_count > self.n_rf_per_group) {
            return invalid(
                &format!("groups[{g}].ue_count"),
                "exceeds the RF chains of its group",
            );
        }
        if self.p_t_dbm.is_empty() || self.p_t_dbm.iter().any(|p| !p.is_finite()) {
            return invalid("p_t_dbm", "need at least one finite transmit power");
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return invalid("noise_psd_dbm_hz", "must be finite");
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return invalid("bandwidth_hz", "must be positive");
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent > 0.0) {
            return invalid("pathloss_exponent", "must be positive");
        }
        if self.n_paths == 0 {
            return invalid("n_paths", "must be positive");
        }
        self.geometry.validate().or_else(|e| invalid("geometry", e))?;
        if !(self.rf_chain_power_w.is_finite() && self.rf_chain_power_w >= 0.0) {
            return invalid("rf_chain_power_w", "must be non-negative");
        }
        if self.algorithms.is_empty() {
            return invalid("algorithms", "at least one algorithm is required");
        }
        if self.algorithms.iter().collect::<BTreeSet<_>>().len() != self.algorithms.len() {
            return invalid("algorithms", "duplicate entries");
        }
        if self.fairness.is_empty() {
            return invalid("fairness", "at least one fairness level is required");
        }
        for f in &self.fairness {
            f.validate().or_else(|e| invalid("fairness", e))?;
        }
        if self.n_realizations == 0 {
            return invalid("n_realizations", "must be positive");
        }
        let dim = 2 * k;
        for &alg in &self.algorithms {
            self.optimizer
                .config_for(alg, 0)
                .validate(dim)
                .or_else(|e| invalid("optimizer", e))?;
        }
        Ok(())
    }

    /// Parses JSON text and resolves groups without validating; empty input
    /// yields the defaults.
    pub fn parse_json(text: &str) -> Result<Self, HarnessError> {
        let text = if text.trim().is_empty() { "{}" } else { text };
        let mut cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("parse error: {e}")))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    /// Parses and validates JSON text.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg = Self::parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Reads a config file without validating it, so overrides can be applied first.
pub fn read_config(path: &Path) -> Result<SystemConfig, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    SystemConfig::parse_json(&text)
}

pub fn load_config(path: &Path) -> Result<SystemConfig, HarnessError> {
    let cfg = read_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_config(cfg: &SystemConfig, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, cfg.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_table_defaults() {
        let cfg = SystemConfig::from_json("").unwrap();
        assert_eq!(cfg.groups.len(), 2);
        assert_eq!(cfg.n_ues, 10);
        assert_eq!(cfg.groups[1].mean_aaod_deg, 205.0);
        assert_eq!(cfg.groups[0].ue_count, 5);
        assert_eq!(cfg.n_rf(), 16);
        assert_eq!(cfg.array.n_antennas(), 256);
        assert_eq!(cfg.p_t_dbm, vec![40.0]);
        assert_eq!(cfg.n_paths, 20);
        assert_eq!(cfg.n_realizations, 5000);
        assert_eq!(cfg, SystemConfig::from_json("{}").unwrap());
    }

    #[test]
    fn uneven_split_and_scalar_sweeps() {
        let cfg = SystemConfig::from_json(
            r#"{"n_groups": 3, "n_ues": 7, "p_t_dbm": 30, "fairness": "maxmin"}"#,
        )
        .unwrap();
        let counts: Vec<_> = cfg.groups.iter().map(|g| g.ue_count).collect();
        assert_eq!(counts, vec![3, 2, 2]);
        assert_eq!(cfg.groups[1].mean_aaod_deg, 145.0);
        assert_eq!(cfg.p_t_dbm, vec![30.0]);
        assert_eq!(cfg.fairness, vec![FairnessSpec::MaxMin]);
    }

    #[test]
    fn round_trip() {
        let cfg = SystemConfig::from_json(
            r#"{"n_ues": 4, "fairness": [0, 2, "maxmin"], "algorithms": ["gwo", "fa"],
                "optimizer": {"iterations": 3, "hyperparams": {"fa": {"kappa2": 0.9}}}}"#,
        )
        .unwrap();
        assert_eq!(SystemConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid_configs() {
        for text in [
            r#"{"n_ues": 20}"#,
            r#"{"n_rf_per_group": 200}"#,
            r#"{"fairness": [-1]}"#,
            r#"{"algorithms": []}"#,
            r#"{"algorithms": ["pso", "pso"]}"#,
            r#"{"algorithms": ["sa"]}"#,
            r#"{"unknown_field": 1}"#,
            r#"{"n_realizations": 0}"#,
            r#"{"optimizer": {"n_agents": 5}, "algorithms": ["aco"]}"#,
            r#"{"groups": [{"mean_eaod_deg": 50, "eaod_spread_deg": 10, "mean_aaod_deg": 25,
                            "aaod_spread_deg": 10, "ue_count": 9}]}"#,
            "[1, 2",
        ] {
            assert!(
                matches!(SystemConfig::from_json(text), Err(HarnessError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn explicit_groups_override_counts() {
        let cfg = SystemConfig::from_json(
            r#"{"n_ues": 99, "n_groups": 5, "groups": [{"mean_eaod_deg": 50, "eaod_spread_deg": 10,
                "mean_aaod_deg": 25, "aaod_spread_deg": 10, "ue_count": 3}]}"#,
        )
        .unwrap();
        assert_eq!((cfg.n_groups, cfg.n_ues, cfg.n_rf()), (1, 3, 8));
    }
}
