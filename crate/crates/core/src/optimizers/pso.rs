//! Particle swarm optimization.

use rand::Rng;

use super::{clip_scalar, initial_population, uniform, BoxProblem, OptimizationTrace, OptimizerConfig, Tracker};

pub fn pso<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> OptimizationTrace
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    let dim = problem.dim();
    let (vmin, vmax) = (cfg.hyperparams.pso.vel_min, cfg.hyperparams.pso.vel_max);
    let mut tracker = Tracker::new(problem, cfg.parallel_eval);

    let mut pos = initial_population(rng, cfg.n_agents, dim, &cfg.initial_points);
    let mut vel = vec![vec![0.0; dim]; cfg.n_agents];
    let mut pbest = pos.clone();
    let mut pbest_score = tracker.score(&pos);
    tracker.close_iteration();

    let q_max = cfg.iterations as f64;
    for q in 1..=cfg.iterations {
        let inertia = 1.0 - (q as f64 - 1.0) / q_max;
        let gbest = tracker.best_point().to_vec();
        for i in 0..cfg.n_agents {
            for v in 0..dim {
                let w1 = uniform(rng, 0.0, 2.0);
                let w2 = uniform(rng, 0.0, 2.0);
                let x = pos[i][v];
                let step = inertia * vel[i][v] + w1 * (pbest[i][v] - x) + w2 * (gbest[v] - x);
                vel[i][v] = clip_scalar(step, vmin, vmax);
                pos[i][v] = clip_scalar(x + vel[i][v], 0.0, 1.0);
            }
        }
        let scores = tracker.score(&pos);
        for i in 0..cfg.n_agents {
            if scores[i] > pbest_score[i] {
                pbest_score[i] = scores[i];
                pbest[i].clone_from(&pos[i]);
            }
        }
        tracker.close_iteration();
    }
    tracker.finish()
}

#[cfg(test)]
mod tests {
    use super::super::test_problems::Sphere;
    use super::super::{run_seeded, Algorithm};
    use super::*;

    #[test]
    fn velocity_bound_limits_each_step() {
        // one iteration from a single injected start can move at most vel_max per dimension
        let p = Sphere::new(3);
        let mut cfg = OptimizerConfig::new(Algorithm::Pso, 2, 1, 1);
        cfg.initial_points = vec![vec![0.9; 3], vec![0.0; 3]];
        let t = run_seeded(&p, &cfg).unwrap();
        assert!(t.best_point.iter().all(|&x| x <= 0.2 + 1e-15 || x >= 0.7 - 1e-15));
    }
}
