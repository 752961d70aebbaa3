//! Continuous ant colony optimization over a solution archive.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{clip_scalar, initial_population, BoxProblem, OptimizationTrace, OptimizerConfig, Tracker};

/// Selection probabilities of archive ranks `0..size` under the Gaussian rank kernel.
pub(crate) fn rank_probabilities(size: usize, locality: f64) -> Vec<f64> {
    let width = size as f64 * locality;
    let weights: Vec<f64> = (0..size)
        .map(|j| (-((j * j) as f64) / (2.0 * width * width)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn sample_rank<R: Rng + ?Sized>(rng: &mut R, cumulative: &[f64]) -> usize {
    let u: f64 = rng.random();
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Sorted best-first; incumbents win ties against newcomers.
fn merge_archive(archive: &mut Vec<(f64, Vec<f64>)>, pop: &[Vec<f64>], scores: &[f64], size: usize) {
    archive.extend(scores.iter().copied().zip(pop.iter().cloned()));
    archive.sort_by(|a, b| b.0.total_cmp(&a.0));
    archive.truncate(size);
}

pub fn aco<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> OptimizationTrace
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    let dim = problem.dim();
    let size = cfg.hyperparams.aco.kappa1;
    let mut tracker = Tracker::new(problem, cfg.parallel_eval);

    let mut pop = initial_population(rng, cfg.n_agents, dim, &cfg.initial_points);
    let scores = tracker.score(&pop);
    let mut archive = Vec::with_capacity(size + cfg.n_agents);
    merge_archive(&mut archive, &pop, &scores, size);
    tracker.close_iteration();

    let mut cumulative = rank_probabilities(size, cfg.hyperparams.aco.kappa2);
    for i in 1..size {
        cumulative[i] += cumulative[i - 1];
    }
    let denom = (size - 1) as f64;

    for _ in 0..cfg.iterations {
        // mean absolute deviation of every archive entry per dimension
        let spread: Vec<Vec<f64>> = archive
            .iter()
            .map(|(_, a)| {
                (0..dim)
                    .map(|v| archive.iter().map(|(_, c)| (a[v] - c[v]).abs()).sum::<f64>() / denom)
                    .collect()
            })
            .collect();
        for ant in pop.iter_mut() {
            for v in 0..dim {
                let j = sample_rank(rng, &cumulative);
                let w: f64 = rng.sample(StandardNormal);
                ant[v] = clip_scalar(archive[j].1[v] + w * spread[j][v], 0.0, 1.0);
            }
        }
        let scores = tracker.score(&pop);
        merge_archive(&mut archive, &pop, &scores, size);
        tracker.close_iteration();
    }
    tracker.finish()
}
