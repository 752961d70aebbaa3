//! Firefly algorithm.

use rand::Rng;

use super::{argmax, clip_scalar, initial_population, uniform, BoxProblem, OptimizationTrace, OptimizerConfig, Tracker};

/// Number of fireflies drawn from an agent budget: `floor(sqrt(n_agents))`.
pub fn firefly_count(n_agents: usize) -> usize {
    n_agents.isqrt()
}

/// Candidate position of firefly `a_i` moving toward `a_j`.
pub(crate) fn attract<R: Rng + ?Sized>(
    rng: &mut R,
    a_i: &[f64],
    a_j: &[f64],
    absorption: f64,
    walk: f64,
) -> Vec<f64> {
    let dist2: f64 = a_i.iter().zip(a_j).map(|(x, y)| (x - y).powi(2)).sum();
    let pull = (-absorption * dist2).exp();
    a_i.iter()
        .zip(a_j)
        .map(|(&x, &y)| clip_scalar(x + pull * (y - x) + walk * uniform(rng, -0.5, 0.5), 0.0, 1.0))
        .collect()
}

pub fn fa<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> OptimizationTrace
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    let dim = problem.dim();
    let n = firefly_count(cfg.n_agents);
    let (absorption, decay) = (cfg.hyperparams.fa.kappa1, cfg.hyperparams.fa.kappa2);
    let mut tracker = Tracker::new(problem, cfg.parallel_eval);

    let mut pos = initial_population(rng, n, dim, &cfg.initial_points);
    tracker.score(&pos);
    tracker.close_iteration();

    for q in 1..=cfg.iterations {
        let walk = decay.powi(q as i32);
        let candidates: Vec<Vec<f64>> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| attract(rng, &pos[i], &pos[j], absorption, walk))
            .collect();
        let scores = tracker.score(&candidates);
        pos = scores
            .chunks(n)
            .zip(candidates.chunks(n))
            .map(|(s, c)| c[argmax(s)].clone())
            .collect();
        tracker.close_iteration();
    }
    tracker.finish()
}
