//! Grey wolf optimization.

use rand::Rng;

use super::{clip_scalar, initial_population, uniform, BoxProblem, OptimizationTrace, OptimizerConfig, Tracker};

/// The three best-ever positions, best first; earlier entries win ties.
struct Leaders {
    entries: Vec<(f64, Vec<f64>)>,
}

impl Leaders {
    fn new() -> Self {
        Self { entries: Vec::with_capacity(4) }
    }

    fn offer(&mut self, score: f64, point: &[f64]) {
        let at = self.entries.iter().position(|(s, _)| score > *s).unwrap_or(self.entries.len());
        if at < 3 {
            self.entries.insert(at, (score, point.to_vec()));
            self.entries.truncate(3);
        }
    }

    /// Alpha, beta and delta; the last one is repeated if fewer than three exist.
    fn get(&self, j: usize) -> &[f64] {
        &self.entries[j.min(self.entries.len() - 1)].1
    }
}

pub fn gwo<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> OptimizationTrace
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    let dim = problem.dim();
    let mut tracker = Tracker::new(problem, cfg.parallel_eval);
    let mut leaders = Leaders::new();

    let mut pos = initial_population(rng, cfg.n_agents, dim, &cfg.initial_points);
    let scores = tracker.score(&pos);
    for (p, &s) in pos.iter().zip(&scores) {
        leaders.offer(s, p);
    }
    tracker.close_iteration();

    let q_max = cfg.iterations as f64;
    for q in 1..=cfg.iterations {
        let kappa = 2.0 - (2.0 * q as f64 - 2.0) / q_max;
        for wolf in pos.iter_mut() {
            for v in 0..dim {
                let x = wolf[v];
                let mut sum = 0.0;
                for j in 0..3 {
                    let lead = leaders.get(j)[v];
                    let w1 = uniform(rng, -kappa, kappa);
                    let w2 = uniform(rng, 0.0, 2.0);
                    sum += lead - w1 * (w2 * lead - x).abs();
                }
                wolf[v] = clip_scalar(sum / 3.0, 0.0, 1.0);
            }
        }
        let scores = tracker.score(&pos);
        for (p, &s) in pos.iter().zip(&scores) {
            leaders.offer(s, p);
        }
        tracker.close_iteration();
    }
    tracker.finish()
}
