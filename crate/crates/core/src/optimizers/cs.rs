//! Cuckoo search with Levy-flight moves.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use super::{clip_scalar, initial_population, BoxProblem, OptimizationTrace, OptimizerConfig, Tracker};

/// Mantegna scale of the numerator Gaussian for Levy exponent `beta`.
pub fn mantegna_sigma(beta: f64) -> f64 {
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = beta * gamma((1.0 + beta) / 2.0) * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

/// Levy-flight displacement for one dimension given the raw step `w1`.
pub fn levy_step(w1: f64, beta: f64) -> f64 {
    beta / PI * gamma(beta) * (beta * PI / 2.0).sin() / w1.abs().powf(1.0 + beta)
}

pub fn cs<P, R>(problem: &P, cfg: &OptimizerConfig, rng: &mut R) -> OptimizationTrace
where
    P: BoxProblem + ?Sized,
    R: Rng + ?Sized,
{
    let dim = problem.dim();
    let n = cfg.n_agents;
    let (replace, beta) = (cfg.hyperparams.cs.kappa1, cfg.hyperparams.cs.kappa2);
    let sigma = mantegna_sigma(beta);
    let mut tracker = Tracker::new(problem, cfg.parallel_eval);

    let mut pos = initial_population(rng, n, dim, &cfg.initial_points);
    let mut score = tracker.score(&pos);
    tracker.close_iteration();

    for _ in 0..cfg.iterations {
        let moved: Vec<Vec<f64>> = pos
            .iter()
            .map(|a| {
                a.iter()
                    .map(|&x| {
                        let w2 = sigma * rng.sample::<f64, _>(StandardNormal);
                        let w3: f64 = rng.sample(StandardNormal);
                        let w1 = w2 / w3.abs().powf(1.0 / beta);
                        clip_scalar(x + levy_step(w1, beta), 0.0, 1.0)
                    })
                    .collect()
            })
            .collect();
        let moved_score = tracker.score(&moved);

        let (kept, kept_score): (Vec<Vec<f64>>, Vec<f64>) = (0..n)
            .map(|i| {
                if moved_score[i] >= score[i] {
                    (moved[i].clone(), moved_score[i])
                } else {
                    (pos[i].clone(), score[i])
                }
            })
            .unzip();

        let mixed: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let j = rng.random_range(0..n);
                (0..dim)
                    .map(|v| if rng.random::<f64>() < replace { kept[j][v] } else { kept[i][v] })
                    .collect()
            })
            .collect();
        let mixed_score = tracker.score(&mixed);

        for i in 0..n {
            let options = [
                (&moved[i], moved_score[i]),
                (&kept[i], kept_score[i]),
                (&mixed[i], mixed_score[i]),
            ];
            let mut best = 0;
            for (k, o) in options.iter().enumerate() {
                if o.1 > options[best].1 {
                    best = k;
                }
            }
            pos[i].clone_from(options[best].0);
            score[i] = options[best].1;
        }
        tracker.close_iteration();
    }
    tracker.finish()
}
