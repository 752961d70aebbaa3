//! Alpha-fair hybrid precoding for mmWave multi-user massive MIMO.
//!
//! The pipeline builds an analog RF beamformer from angular supports, then
//! searches the `2K` parameters of the optimal digital baseband precoder with
//! one of five swarm metaheuristics, and scores the result with sum-rate,
//! energy-efficiency and fairness metrics.

pub mod channel;
pub mod metrics;
pub mod numerics;
pub mod rf_stage;
pub mod bb_stage;
pub mod optimizers;
pub mod harness;
