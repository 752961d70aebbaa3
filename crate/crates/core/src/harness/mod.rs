//! Monte-Carlo campaigns over the full hybrid precoding pipeline.
//!
//! A campaign designs the RF beamformer once from the configured angular
//! supports, then for every realization draws UE placements and a channel,
//! runs each optimizer on the baseband objective for every transmit power and
//! fairness level, and scores an equal-allocation baseline alongside.

mod campaign;
mod config;
mod output;
mod rng;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use campaign::{
    aggregate, run_campaign, run_realization, Aggregate, Campaign, CampaignResult, Failure, MeanSe, Record,
};
pub use config::{default_groups, load_config, read_config, save_config, OptimizerSettings, SystemConfig};
pub use output::{emit_results, Summary, RECORD_COLUMNS, TRACE_COLUMNS};
pub use rng::{child_rng, splitmix64, stream_seed, StreamPurpose};

use crate::optimizers::Algorithm;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("realization {index}: {message}")]
    Realization { index: usize, message: String },
    #[error("{failed} of {total} realizations failed (first: {first})")]
    Campaign {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 3,
        }
    }
}

/// How the baseband agent of a record was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Every agent component at 0.5, no search.
    Baseline,
    Optimized(Algorithm),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Baseline => f.write_str("baseline"),
            Self::Optimized(a) => a.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "baseline" {
            Ok(Self::Baseline)
        } else {
            s.parse().map(Self::Optimized).map_err(|e| e.to_string())
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
