//! Realization runner, campaign driver and aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::{child_rng, stream_seed, StreamPurpose};
use super::{HarnessError, Method, SystemConfig};
use crate::bb_stage::{effective_channel, evaluate_agent, EffectiveChannel, FairnessSpec, PrecodingProblem, SearchAgent};
use crate::channel::{draw_placement, generate_channel, noise_power_watts, ChannelModel};
use crate::metrics::{dbm_to_watts, MetricRecord};
use crate::optimizers::run_seeded;
use crate::rf_stage::{design_rf_beamformer, RfBeamformer};

/// One scored agent: a realization, transmit power, method and fairness level.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub realization: usize,
    pub p_t_index: usize,
    pub p_t_dbm: f64,
    pub method: Method,
    pub fairness_index: usize,
    pub fairness: FairnessSpec,
    /// Utility of the chosen agent under `fairness`.
    pub objective: f64,
    pub metrics: MetricRecord,
    /// Objective evaluations spent by the search; 0 for the baseline.
    pub evaluations: usize,
    pub agent: Vec<f64>,
    /// Best-ever objective per iteration; empty for the baseline.
    pub trace: Vec<f64>,
}

impl Record {
    fn sort_key(&self) -> (usize, usize, Method, usize) {
        (self.realization, self.p_t_index, self.method, self.fairness_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub realization: usize,
    pub message: String,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    /// Zeros for an empty sample; `se` is 0 for a single sample.
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len();
        if n == 0 {
            return Self { mean: 0.0, se: 0.0, n };
        }
        let mean = x.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub p_t_dbm: f64,
    pub method: Method,
    pub fairness: FairnessSpec,
    pub n: usize,
    pub objective: MeanSe,
    pub sum_rate: MeanSe,
    /// Over realizations where the index is defined.
    pub jain: MeanSe,
    pub rate_gap: MeanSe,
    pub min_rate: MeanSe,
    pub energy_efficiency: MeanSe,
}

impl Aggregate {
    pub fn matches(&self, p_t_dbm: f64, method: Method, fairness: FairnessSpec) -> bool {
        self.p_t_dbm == p_t_dbm && self.method == method && self.fairness == fairness
    }
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: SystemConfig,
    /// Sorted by realization, transmit power, method and fairness level.
    pub records: Vec<Record>,
    pub failures: Vec<Failure>,
    pub aggregates: Vec<Aggregate>,
}

impl CampaignResult {
    pub fn find(&self, p_t_dbm: f64, method: Method, fairness: FairnessSpec) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.matches(p_t_dbm, method, fairness))
    }
}

/// Means and standard errors per (transmit power, method, fairness level).
pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, Method, usize), Vec<&Record>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.p_t_index, r.method, r.fairness_index))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let stat = |f: &dyn Fn(&Record) -> f64| MeanSe::from_samples(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            let jain: Vec<f64> = rs.iter().filter_map(|r| r.metrics.jain).collect();
            Aggregate {
                p_t_dbm: rs[0].p_t_dbm,
                method: rs[0].method,
                fairness: rs[0].fairness,
                n: rs.len(),
                objective: stat(&|r| r.objective),
                sum_rate: stat(&|r| r.metrics.sum_rate),
                jain: MeanSe::from_samples(&jain),
                rate_gap: stat(&|r| r.metrics.rate_gap),
                min_rate: stat(&|r| r.metrics.min_rate()),
                energy_efficiency: stat(&|r| r.metrics.energy_efficiency),
            }
        })
        .collect()
}

/// A validated configuration with its realization-independent RF stage.
#[derive(Debug, Clone)]
pub struct Campaign {
    config: SystemConfig,
    model: ChannelModel,
    rf: RfBeamformer,
    noise_power: f64,
}

impl Campaign {
    pub fn new(config: SystemConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let per_group = vec![config.n_rf_per_group; config.groups.len()];
        let rf = design_rf_beamformer(&config.groups, config.array, &per_group)
            .map_err(|e| HarnessError::Config(format!("rf stage: {e}")))?;
        Ok(Self {
            model: config.channel_model(),
            noise_power: noise_power_watts(config.noise_psd_dbm_hz, config.bandwidth_hz),
            config,
            rf,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn rf(&self) -> &RfBeamformer {
        &self.rf
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// The baseband view of one realization at the first transmit power.
    pub fn effective_channel(&self, index: usize) -> Result<EffectiveChannel, HarnessError> {
        let fail = |e: &dyn std::fmt::Display| HarnessError::Realization {
            index,
            message: e.to_string(),
        };
        let cfg = &self.config;
        let mut placement_rng = child_rng(cfg.master_seed, index, StreamPurpose::Placement);
        let placements: Vec<_> = (0..cfg.n_ues)
            .map(|_| draw_placement(&mut placement_rng, &cfg.geometry))
            .collect();
        let mut channel_rng = child_rng(cfg.master_seed, index, StreamPurpose::Channel);
        let realization = generate_channel(&self.model, &placements, &mut channel_rng).map_err(|e| fail(&e))?;
        let h_eff = effective_channel(&realization.h, &self.rf.f).map_err(|e| fail(&e))?;
        EffectiveChannel::new(h_eff, self.noise_power, dbm_to_watts(cfg.p_t_dbm[0])).map_err(|e| fail(&e))
    }

    pub fn run_realization(&self, index: usize) -> Result<Vec<Record>, HarnessError> {
        let fail = |e: &dyn std::fmt::Display| HarnessError::Realization {
            index,
            message: e.to_string(),
        };
        let cfg = &self.config;
        let base = self.effective_channel(index)?;
        let uniform = SearchAgent::uniform(cfg.n_ues);
        let n_rf = self.rf.n_rf();
        let mut records = Vec::new();

        for (p_t_index, &p_t_dbm) in cfg.p_t_dbm.iter().enumerate() {
            let p_t_w = dbm_to_watts(p_t_dbm);
            let eff = base.with_total_power(p_t_w).map_err(|e| fail(&e))?;
            let mut push = |method, fairness_index: usize, agent: &SearchAgent, evaluations, trace: Vec<f64>| {
                let fairness = cfg.fairness[fairness_index];
                let eval = evaluate_agent(agent, &eff, fairness).map_err(|e| fail(&e))?;
                records.push(Record {
                    realization: index,
                    p_t_index,
                    p_t_dbm,
                    method,
                    fairness_index,
                    fairness,
                    objective: eval.utility,
                    metrics: MetricRecord::from_rates(&eval.rates, p_t_w, n_rf, cfg.rf_chain_power_w),
                    evaluations,
                    agent: agent.as_slice().to_vec(),
                    trace,
                });
                Ok::<_, HarnessError>(())
            };

            for fairness_index in 0..cfg.fairness.len() {
                push(Method::Baseline, fairness_index, &uniform, 0, Vec::new())?;
            }
            for &algorithm in &cfg.algorithms {
                let seed = stream_seed(cfg.master_seed, index, StreamPurpose::Optimizer { p_t_index, algorithm });
                for (fairness_index, &fairness) in cfg.fairness.iter().enumerate() {
                    let mut opt = cfg.optimizer.config_for(algorithm, seed);
                    if cfg.inject_baseline {
                        opt.initial_points = vec![uniform.as_slice().to_vec()];
                    }
                    let problem = PrecodingProblem {
                        channel: &eff,
                        fairness,
                    };
                    let trace = run_seeded(&problem, &opt).map_err(|e| fail(&e))?;
                    let agent = SearchAgent::new(trace.best_point).map_err(|e| fail(&e))?;
                    push(
                        Method::Optimized(algorithm),
                        fairness_index,
                        &agent,
                        trace.evaluations_used,
                        trace.per_iteration_best,
                    )?;
                }
            }
        }
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(records)
    }

    pub fn run(&self) -> Result<CampaignResult, HarnessError> {
        let n = self.config.n_realizations;
        let work = || {
            (0..n)
                .into_par_iter()
                .map(|i| (i, self.run_realization(i)))
                .collect::<Vec<_>>()
        };
        let outcomes = if self.config.workers == 0 {
            work()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.workers)
                .build()
                .map_err(|e| HarnessError::Config(format!("workers: {e}")))?
                .install(work)
        };

        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (realization, outcome) in outcomes {
            match outcome {
                Ok(r) => records.extend(r),
                Err(e) => failures.push(Failure {
                    realization,
                    message: e.to_string(),
                }),
            }
        }
        if failures.len() * 100 > n {
            return Err(HarnessError::Campaign {
                failed: failures.len(),
                total: n,
                first: failures[0].message.clone(),
            });
        }
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(CampaignResult {
            aggregates: aggregate(&records),
            config: self.config.clone(),
            records,
            failures,
        })
    }
}

pub fn run_realization(cfg: &SystemConfig, index: usize) -> Result<Vec<Record>, HarnessError> {
    Campaign::new(cfg.clone())?.run_realization(index)
}

pub fn run_campaign(cfg: &SystemConfig) -> Result<CampaignResult, HarnessError> {
    Campaign::new(cfg.clone())?.run()
}
