//! Digital baseband precoder and the alpha-fair objective.
//!
//! A search agent `a = [p_1..p_K, beta_1..beta_K]` in `[0,1]^{2K}` fixes the
//! optimal precoder up to its `2K` parameters:
//!
//! ```text
//! G   = I + sum_u (eps2 * beta_u / sigma^2) * Heff_u^H Heff_u
//! b_k = sqrt(eps1 * p_k) * G^-1 Heff_k^H / ||G^-1 Heff_k^H||
//! ```
//!
//! where `Heff_k` is row `k` of `H F`, `eps1 = P_T / sum p` and
//! `eps2 = P_T / sum beta`. The directions are evaluated through the
//! equivalent `K x K` form `Heff^H (sigma^2 diag(1/beta) + Heff Heff^H)^-1`,
//! factored once per agent. Scoring an agent means building `B`, computing
//! per-UE SINR and rate, and summing the alpha-fair utility.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::numerics::{matmul, norm, CMatrix, Lu, NumericsError, C64};
use crate::optimizers::BoxProblem;

/// Agent components are floored here before normalization.
pub const AGENT_FLOOR: f64 = 1e-9;
/// Rates are floored here inside the utility when `alpha >= 1`.
pub const RATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BbError {
    #[error("search agent must have even length 2K, got {0}")]
    AgentLength(usize),
    #[error("agent component {index} = {value} outside [0, 1]")]
    AgentRange { index: usize, value: f64 },
    #[error("agent has {agent} components for {ues} UEs")]
    AgentMismatch { agent: usize, ues: usize },
    #[error("noise and transmit power must be positive and finite")]
    Power,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The `K x N_RF` channel the baseband stage sees, with its power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    h_eff: CMatrix,
    noise_power: f64,
    total_power: f64,
}

impl EffectiveChannel {
    pub fn new(h_eff: CMatrix, noise_power: f64, total_power: f64) -> Result<Self, BbError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(noise_power) || !ok(total_power) {
            return Err(BbError::Power);
        }
        Ok(Self {
            h_eff,
            noise_power,
            total_power,
        })
    }

    pub fn from_channel(
        h: &CMatrix,
        f: &CMatrix,
        noise_power: f64,
        total_power: f64,
    ) -> Result<Self, BbError> {
        Self::new(effective_channel(h, f)?, noise_power, total_power)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h_eff
    }

    pub fn n_ues(&self) -> usize {
        self.h_eff.rows()
    }

    pub fn n_rf(&self) -> usize {
        self.h_eff.cols()
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn with_total_power(&self, total_power: f64) -> Result<Self, BbError> {
        Self::new(self.h_eff.clone(), self.noise_power, total_power)
    }
}

/// `H F`.
pub fn effective_channel(h: &CMatrix, f: &CMatrix) -> Result<CMatrix, NumericsError> {
    matmul(h, f)
}

/// Normalized powers followed by normalized regularizers, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchAgent(Vec<f64>);

impl SearchAgent {
    pub fn new(components: Vec<f64>) -> Result<Self, BbError> {
        if components.is_empty() || components.len() % 2 != 0 {
            return Err(BbError::AgentLength(components.len()));
        }
        if let Some((index, &value)) = components
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(BbError::AgentRange { index, value });
        }
        Ok(Self(components))
    }

    /// Every component at 0.5: equal power and equal regularization.
    pub fn uniform(n_ues: usize) -> Self {
        Self(vec![0.5; 2 * n_ues])
    }

    pub fn n_ues(&self) -> usize {
        self.0.len() / 2
    }

    pub fn powers(&self) -> &[f64] {
        &self.0[..self.n_ues()]
    }

    pub fn regularizers(&self) -> &[f64] {
        &self.0[self.n_ues()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn floored(v: &[f64]) -> impl Iterator<Item = f64> + '_ {
    v.iter().map(|x| x.max(AGENT_FLOOR))
}

/// `(P_T / sum p, P_T / sum beta)` over floored components.
pub fn normalization(agent: &SearchAgent, p_t: f64) -> (f64, f64) {
    let sp: f64 = floored(agent.powers()).sum();
    let sb: f64 = floored(agent.regularizers()).sum();
    (p_t / sp, p_t / sb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbPrecoder {
    /// `N_RF x K`, column `k` is `b_k`.
    pub b: CMatrix,
    pub powers: Vec<f64>,
    pub regularizers: Vec<f64>,
    /// Unit-norm beamforming directions, one per UE.
    pub directions: Vec<Vec<C64>>,
}

pub fn bb_precoder(agent: &SearchAgent, eff: &EffectiveChannel) -> Result<BbPrecoder, BbError> {
    let k_ues = eff.n_ues();
    let n_rf = eff.n_rf();
    if agent.n_ues() != k_ues {
        return Err(BbError::AgentMismatch {
            agent: agent.as_slice().len(),
            ues: k_ues,
        });
    }
    let (eps1, eps2) = normalization(agent, eff.total_power);
    let powers: Vec<f64> = floored(agent.powers()).map(|p| eps1 * p).collect();
    let regularizers: Vec<f64> = floored(agent.regularizers()).map(|b| eps2 * b).collect();

    // G^-1 Heff^H = Heff^H (diag(sigma^2 / beta) + Heff Heff^H)^-1 diag(sigma^2 / beta),
    // and the right diagonal only rescales columns. The K x K system is
    // equilibrated by the UE channel norms, which keeps it well conditioned
    // when path loss spreads the rows over many orders of magnitude.
    let h = &eff.h_eff;
    let scale: Vec<f64> = (0..k_ues)
        .map(|k| {
            let len = norm(h.row(k));
            if len > 0.0 {
                1.0 / len
            } else {
                1.0
            }
        })
        .collect();
    let mut kernel = CMatrix::zeros(k_ues, k_ues);
    for k in 0..k_ues {
        let hk = h.row(k);
        for u in 0..k_ues {
            let hu = h.row(u);
            let dot: C64 = hk.iter().zip(hu).map(|(x, y)| x * y.conj()).sum();
            kernel[(k, u)] = dot * (scale[k] * scale[u]);
        }
        kernel[(k, k)] += eff.noise_power / regularizers[k] * scale[k] * scale[k];
    }
    let lu = Lu::factor(&kernel)?;

    let mut b = CMatrix::zeros(n_rf, k_ues);
    let mut directions = Vec::with_capacity(k_ues);
    let mut unit = vec![C64::new(0.0, 0.0); k_ues];
    for k in 0..k_ues {
        let mut d = vec![C64::new(0.0, 0.0); n_rf];
        if norm(h.row(k)) > 0.0 {
            unit.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            unit[k] = C64::new(1.0, 0.0);
            let y = lu.solve(&unit);
            for (u, yu) in y.iter().enumerate() {
                let c = yu * scale[u];
                for (di, hz) in d.iter_mut().zip(h.row(u)) {
                    *di += hz.conj() * c;
                }
            }
            let len = norm(&d);
            if len > 0.0 {
                d.iter_mut().for_each(|z| *z /= len);
            }
        }
        let amp = powers[k].sqrt();
        for (i, z) in d.iter().enumerate() {
            b[(i, k)] = z * amp;
        }
        directions.push(d);
    }
    Ok(BbPrecoder {
        b,
        powers,
        regularizers,
        directions,
    })
}

/// SINR of every UE given the effective channel and baseband precoder.
pub fn sinr_from_effective(h_eff: &CMatrix, b: &CMatrix, noise_power: f64) -> Result<Vec<f64>, NumericsError> {
    let y = matmul(h_eff, b)?;
    Ok((0..y.rows())
        .map(|k| {
            let row = y.row(k);
            let signal = row[k].norm_sqr();
            let interference: f64 = row
                .iter()
                .enumerate()
                .filter(|&(u, _)| u != k)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            signal / (interference + noise_power)
        })
        .collect())
}

/// `|h_k^T F b_k|^2 / (sum_{u != k} |h_k^T F b_u|^2 + sigma^2)`.
pub fn sinr_per_ue(h: &CMatrix, f: &CMatrix, b: &CMatrix, noise_power: f64) -> Result<Vec<f64>, NumericsError> {
    sinr_from_effective(&effective_channel(h, f)?, b, noise_power)
}

pub fn rate_per_ue(sinr: &[f64]) -> Vec<f64> {
    sinr.iter().map(|s| (1.0 + s).log2()).collect()
}

/// Fairness target: an alpha-fair utility, or max-min as its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairnessSpec {
    Alpha(f64),
    MaxMin,
}

impl FairnessSpec {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Self::Alpha(a) if !(a.is_finite() && a >= 0.0) => {
                Err(format!("alpha must be finite and non-negative, got {a}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FairnessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Alpha(a) => write!(f, "{a}"),
            Self::MaxMin => f.write_str("maxmin"),
        }
    }
}

impl FromStr for FairnessSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "maxmin" | "max_min" | "max-min" | "inf" | "infinity" => Ok(Self::MaxMin),
            _ => {
                let a: f64 = s.parse().map_err(|_| format!("invalid fairness level `{s}`"))?;
                let spec = Self::Alpha(a);
                spec.validate()?;
                Ok(spec)
            }
        }
    }
}

impl Serialize for FairnessSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Alpha(a) => s.serialize_f64(*a),
            Self::MaxMin => s.serialize_str("maxmin"),
        }
    }
}

impl<'de> Deserialize<'de> for FairnessSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let spec = match Raw::deserialize(d)? {
            Raw::Num(a) => FairnessSpec::Alpha(a),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom)?,
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

/// Alpha-fair utility of one rate.
pub fn alpha_utility(rate: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return rate;
    }
    let x = rate.max(RATE_FLOOR);
    if alpha == 1.0 {
        x.ln()
    } else if alpha < 1.0 {
        rate.max(0.0).powf(1.0 - alpha) / (1.0 - alpha)
    } else {
        x.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

pub fn utility(rates: &[f64], spec: FairnessSpec) -> f64 {
    match spec {
        FairnessSpec::Alpha(alpha) => rates.iter().map(|&r| alpha_utility(r, alpha)).sum(),
        FairnessSpec::MaxMin => rates.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Everything computed while scoring one agent.
#[derive(Debug, Clone)]
pub struct AgentEvaluation {
    pub precoder: BbPrecoder,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub utility: f64,
}

pub fn evaluate_agent(
    agent: &SearchAgent,
    eff: &EffectiveChannel,
    spec: FairnessSpec,
) -> Result<AgentEvaluation, BbError> {
    let precoder = bb_precoder(agent, eff)?;
    let sinr = sinr_from_effective(&eff.h_eff, &precoder.b, eff.noise_power)?;
    let rates = rate_per_ue(&sinr);
    let utility = utility(&rates, spec);
    Ok(AgentEvaluation {
        precoder,
        sinr,
        rates,
        utility,
    })
}

/// The alpha-fair objective of one agent.
pub fn objective(agent: &SearchAgent, eff: &EffectiveChannel, spec: FairnessSpec) -> Result<f64, BbError> {
    Ok(evaluate_agent(agent, eff, spec)?.utility)
}

/// Adapts the objective to the optimizers' box problem over `[0,1]^{2K}`.
#[derive(Debug, Clone)]
pub struct PrecodingProblem<'a> {
    pub channel: &'a EffectiveChannel,
    pub fairness: FairnessSpec,
}

impl BoxProblem for PrecodingProblem<'_> {
    fn dim(&self) -> usize {
        2 * self.channel.n_ues()
    }

    fn evaluate(&self, point: &[f64]) -> f64 {
        SearchAgent::new(point.to_vec())
            .and_then(|a| objective(&a, self.channel, self.fairness))
            .unwrap_or(f64::NEG_INFINITY)
    }
}
