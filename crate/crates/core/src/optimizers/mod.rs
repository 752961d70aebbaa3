//! Box-constrained swarm metaheuristics over `[0,1]^dim`.
//!
//! Every algorithm maximizes a [`BoxProblem`] and reports the best point seen
//! over its whole run, so traces are monotone even when the population itself
//! is not elitist. Random draws come from one sequential stream in a fixed
//! order (agent-major, dimension-minor); evaluations may run on a thread pool
//! without changing the result.

mod aco;
mod cs;
mod fa;
mod gwo;
mod pso;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aco::aco;
pub use cs::{cs, levy_step, mantegna_sigma};
pub use fa::{fa, firefly_count};
pub use gwo::gwo;
pub use pso::pso;

/// A maximization problem over the unit box.
pub trait BoxProblem: Sync {
    fn dim(&self) -> usize;
    /// Must be deterministic for a fixed point.
    fn evaluate(&self, point: &[f64]) -> f64;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid optimizer configuration: {0}")]
    Config(String),
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, OptimizerError> {
    Err(OptimizerError::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Gwo,
    Aco,
    Cs,
    Fa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Self::Pso, Self::Gwo, Self::Aco, Self::Cs, Self::Fa];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pso => "pso",
            Self::Gwo => "gwo",
            Self::Aco => "aco",
            Self::Cs => "cs",
            Self::Fa => "fa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, OptimizerError> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| OptimizerError::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub vel_min: f64,
    pub vel_max: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            vel_min: -0.2,
            vel_max: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GwoParams {}

/// `kappa1` is the archive size, `kappa2` the rank-kernel locality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    pub kappa1: usize,
    pub kappa2: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            kappa1: 10,
            kappa2: 0.5,
        }
    }
}

/// `kappa1` is the replacement probability, `kappa2` the Levy exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsParams {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for CsParams {
    fn default() -> Self {
        Self {
            kappa1: 0.25,
            kappa2: 1.5,
        }
    }
}

/// `kappa1` is the light absorption, `kappa2` the random-walk decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaParams {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for FaParams {
    fn default() -> Self {
        Self {
            kappa1: 0.1,
            kappa2: 0.97,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub pso: PsoParams,
    pub gwo: GwoParams,
    pub aco: AcoParams,
    pub cs: CsParams,
    pub fa: FaParams,
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let finite = |x: f64| x.is_finite();
        let p = self.pso;
        if !(finite(p.vel_min) && finite(p.vel_max) && p.vel_min <= p.vel_max) {
            return config_err("pso velocity bounds must satisfy vel_min <= vel_max");
        }
        if self.aco.kappa1 < 2 {
            return config_err("aco archive size kappa1 must be at least 2");
        }
        if !(finite(self.aco.kappa2) && self.aco.kappa2 > 0.0) {
            return config_err("aco kappa2 must be positive");
        }
        if !(0.0..=1.0).contains(&self.cs.kappa1) {
            return config_err("cs kappa1 must lie in [0, 1]");
        }
        if !(self.cs.kappa2 > 0.0 && self.cs.kappa2 <= 2.0) {
            return config_err("cs Levy exponent kappa2 must lie in (0, 2]");
        }
        if !(finite(self.fa.kappa1) && self.fa.kappa1 >= 0.0) {
            return config_err("fa kappa1 must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.fa.kappa2) {
            return config_err("fa kappa2 must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub n_agents: usize,
    pub iterations: usize,
    pub algorithm: Algorithm,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    /// Evaluate population members on the rayon pool.
    pub parallel_eval: bool,
    /// Points that replace the first random agents of the initial population.
    pub initial_points: Vec<Vec<f64>>,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, n_agents: usize, iterations: usize, seed: u64) -> Self {
        Self {
            n_agents,
            iterations,
            algorithm,
            hyperparams: Hyperparams::default(),
            seed,
            parallel_eval: false,
            initial_points: Vec::new(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), OptimizerError> {
        if dim == 0 {
            return config_err("problem dimension must be positive");
        }
        if self.n_agents < 2 {
            return config_err("at least two search agents are required");
        }
        self.hyperparams.validate()?;
        match self.algorithm {
            Algorithm::Aco if self.hyperparams.aco.kappa1 > self.n_agents => {
                return config_err(format!(
                    "aco archive size {} exceeds the {} ants",
                    self.hyperparams.aco.kappa1, self.n_agents
                ));
            }
            Algorithm::Fa if self.n_agents < 4 => {
                return config_err("fa needs at least 4 agents to form 2 fireflies");
            }
            _ => {}
        }
        for p in &self.initial_points {
            if p.len() != dim || p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return config_err("initial points must lie in the unit box of the problem dimension");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub best_point: Vec<f64>,
    pub best_score: f64,
    /// Best-ever score after initialization and after each iteration.
    pub per_iteration_best: Vec<f64>,
    pub evaluations_used: usize,
}

/// Componentwise clamp to `[lo, hi]`.
pub fn clip(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    x.iter().map(|&v| clip_scalar(v, lo, hi)).collect()
}

pub(crate) fn clip_scalar(v: f64, lo: f64, hi: f64) -> f64 {
    lo.max(v.min(hi))
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Scores points and keeps the best-ever record.
pub(crate) struct Tracker<'a, P: BoxProblem + ?Sized> {
    problem: &'a P,
    parallel: bool,
    evaluations: usize,
    best_point: Vec<f64>,
    best_score: f64,
    history: Vec<f64>,
}

impl<'a, P: BoxProblem + ?Sized> Tracker<'a, P> {
    pub(crate) fn new(problem: &'a P, parallel: bool) -> Self {
        Self {
            problem,
            parallel,
            evaluations: 0,
            best_point: Vec::new(),
            best_score: f64::NEG_INFINITY,
            history: Vec::new(),
        }
    }

    /// NaN scores are treated as `-inf`.
    pub(crate) fn score(&mut self, points: &[Vec<f64>]) -> Vec<f64> {
        let eval = |p: &Vec<f64>| {
            debug_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
            let s = self.problem.evaluate(p);
            if s.is_nan() {
                f64::NEG_INFINITY
            } else {
                s
            }
        };
        let scores: Vec<f64> = if self.parallel {
            points.par_iter().map(eval).collect()
        } else {
            points.iter().map(eval).collect()
        };
        self.evaluations += points.len();
        for (p, &s) in points.iter().zip(&scores) {
            if s > self.best_score || self.best_point.is_empty() {
                self.best_score = s;
                self.best_point.clone_from(p);
            }
        }
        scores
    }

    pub(crate) fn close_iteration(&mut self) {
        self.history.push(self.best_score);
    }

    pub(crate) fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub(crate) fn finish(self) -> OptimizationTrace {
        OptimizationTrace {
            best_point: self.best_point,
            best_score: self.best_score,
            per_iteration_best: self.history,
            evaluations_used: self.evaluations,
        }
    }
}

/// `n` points in the unit box, drawn agent-major then dimension-minor, with
/// the configured initial points substituted for the first agents.
pub(crate) fn initial_population<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dim: usize,
    injected: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let mut pop: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    for (slot, p) in pop.iter_mut().zip(injected) {
        slot.clone_from(p);
    }
    pop
}

/// Index of the largest score; the lowest index wins ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Runs the configured algorithm with the given random stream.
pub fn run<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> Result<OptimizationTrace, OptimizerError>
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate(problem.dim())?;
    Ok(match cfg.algorithm {
        Algorithm::Pso => pso(problem, cfg, rng),
        Algorithm::Gwo => gwo(problem, cfg, rng),
        Algorithm::Aco => aco(problem, cfg, rng),
        Algorithm::Cs => cs(problem, cfg, rng),
        Algorithm::Fa => fa(problem, cfg, rng),
    })
}

/// Runs the configured algorithm with a stream seeded from `cfg.seed`.
pub fn run_seeded<P: BoxProblem + ?Sized>(
    problem: &P,
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace, OptimizerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run(problem, cfg, &mut rng)
}


#[cfg(test)]
mod tests {
    use super::test_problems::Sphere;
    use super::*;
    use std::sync::atomic::Ordering;

    #[test]
    fn clip_examples() {
        assert_eq!(clip(&[1.3, 0.5, -0.2], 0.0, 1.0), vec![1.0, 0.5, 0.0]);
        assert_eq!(clip(&[0.1, 0.9], 0.0, 1.0), vec![0.1, 0.9]);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{a}\""));
        }
        assert!("sa".parse::<Algorithm>().is_err());
    }

    #[test]
    fn hyperparameter_defaults() {
        let h = Hyperparams::default();
        assert_eq!((h.pso.vel_min, h.pso.vel_max), (-0.2, 0.2));
        assert_eq!((h.aco.kappa1, h.aco.kappa2), (10, 0.5));
        assert_eq!((h.cs.kappa1, h.cs.kappa2), (0.25, 1.5));
        assert_eq!((h.fa.kappa1, h.fa.kappa2), (0.1, 0.97));
        let parsed: Hyperparams = serde_json::from_str(r#"{"aco": {"kappa1": 5}}"#).unwrap();
        assert_eq!(parsed.aco.kappa1, 5);
        assert_eq!(parsed.aco.kappa2, 0.5);
    }

    #[test]
    fn config_errors() {
        let p = Sphere::new(3);
        let mut cfg = OptimizerConfig::new(Algorithm::Aco, 20, 2, 0);
        cfg.hyperparams.aco.kappa1 = 1;
        assert!(run_seeded(&p, &cfg).is_err());
        cfg.hyperparams.aco.kappa1 = 21;
        assert!(run_seeded(&p, &cfg).is_err());
        let cfg = OptimizerConfig::new(Algorithm::Fa, 3, 2, 0);
        assert!(run_seeded(&p, &cfg).is_err());
        let cfg = OptimizerConfig::new(Algorithm::Pso, 1, 2, 0);
        assert!(run_seeded(&p, &cfg).is_err());
        let mut cfg = OptimizerConfig::new(Algorithm::Gwo, 5, 2, 0);
        cfg.initial_points = vec![vec![0.5, 1.5, 0.5]];
        assert!(run_seeded(&p, &cfg).is_err());
    }

    #[test]
    fn zero_iterations_return_best_initial_agent() {
        for alg in Algorithm::ALL {
            let p = Sphere::new(4);
            let cfg = OptimizerConfig::new(alg, 16, 0, 9);
            let t = run_seeded(&p, &cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let n = if alg == Algorithm::Fa { 4 } else { 16 };
            let pop = initial_population(&mut rng, n, 4, &[]);
            let scores: Vec<f64> = pop.iter().map(|x| p.evaluate(x)).collect();
            let best = argmax(&scores);
            assert_eq!(t.best_point, pop[best], "{alg}");
            assert_eq!(t.per_iteration_best, vec![scores[best]]);
            assert_eq!(t.evaluations_used, n);
        }
    }

    #[test]
    fn evaluation_counts() {
        let (n, q) = (16, 7);
        for alg in Algorithm::ALL {
            let p = Sphere::new(5);
            let t = run_seeded(&p, &OptimizerConfig::new(alg, n, q, 3)).unwrap();
            let expected = match alg {
                Algorithm::Cs => n + 2 * n * q,
                Algorithm::Fa => 4 + q * 16,
                _ => n * (q + 1),
            };
            assert_eq!(t.evaluations_used, expected, "{alg}");
            assert_eq!(p.calls.load(Ordering::Relaxed), expected, "{alg}");
        }
    }

    #[test]
    fn traces_are_deterministic_and_parallel_safe() {
        for alg in Algorithm::ALL {
            let p = Sphere::new(6);
            let mut cfg = OptimizerConfig::new(alg, 25, 12, 42);
            let a = run_seeded(&p, &cfg).unwrap();
            let b = run_seeded(&p, &cfg).unwrap();
            cfg.parallel_eval = true;
            let c = run_seeded(&p, &cfg).unwrap();
            assert_eq!(a, b, "{alg}");
            assert_eq!(a, c, "{alg}");
            assert_eq!(a.per_iteration_best.len(), 13);
            assert!(a.per_iteration_best.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(a.best_score, *a.per_iteration_best.last().unwrap());
            assert_eq!(p.evaluate(&a.best_point), a.best_score);
        }
    }

    #[test]
    fn injected_points_enter_the_population() {
        let p = Sphere::new(3);
        for alg in Algorithm::ALL {
            let mut cfg = OptimizerConfig::new(alg, 16, 0, 5);
            cfg.initial_points = vec![vec![0.3; 3]];
            let t = run_seeded(&p, &cfg).unwrap();
            assert_eq!(t.best_score, 0.0, "{alg}");
            assert_eq!(t.best_point, vec![0.3; 3]);
        }
    }

    #[test]
    fn sphere_convergence() {
        // median over 10 seeds, 20 dims, 100 agents, 100 iterations
        for alg in Algorithm::ALL {
            let mut finals: Vec<f64> = (0..10)
                .map(|seed| {
                    let p = Sphere::new(20);
                    run_seeded(&p, &OptimizerConfig::new(alg, 100, 100, seed)).unwrap().best_score
                })
                .collect();
            finals.sort_by(f64::total_cmp);
            let median = 0.5 * (finals[4] + finals[5]);
            assert!(median >= -1e-2, "{alg}: median {median}");
        }
    }
}
