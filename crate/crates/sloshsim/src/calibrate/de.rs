//! Differential evolution (rand/1/bin) for low-dimensional bound-constrained
//! fitting.
//!
//! Trial vectors are generated sequentially from a single seeded RNG, then
//! evaluated in an order-preserving parallel map, so the optimizer output is
//! a pure function of the seed regardless of thread count. Set
//! `SLOSHSIM_THREADS` to cap the evaluation workers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Optimizer knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig {
    /// Population size; 0 picks 15 per dimension.
    pub population: usize,
    pub max_generations: u32,
    /// Binomial crossover probability.
    pub crossover: f64,
    /// Differential weight is dithered uniformly in this half-open range
    /// per trial, which removes the need to tune a single fixed value.
    pub differential_weight: (f64, f64),
    /// Stop once the population objective spread (max − min) falls below.
    pub tol_spread: f64,
    /// Stop once the best objective reaches this value.
    pub target: Option<f64>,
    pub seed: u64,
    /// Evaluate populations with rayon; trial generation stays sequential.
    pub parallel: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            population: 0,
            max_generations: 200,
            crossover: 0.7,
            differential_weight: (0.5, 1.0),
            tol_spread: 1e-12,
            target: None,
            seed: 0,
            parallel: true,
        }
    }
}

/// Optimizer outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub generations: u32,
    pub evaluations: u64,
    /// True when stopped by spread or target rather than the generation cap.
    pub converged: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn eval_population<F>(f: &F, pool: Option<&rayon::ThreadPool>, xs: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match pool {
        Some(p) => p.install(|| xs.par_iter().map(|x| sanitize(f(x))).collect()),
        None => xs.iter().map(|x| sanitize(f(x))).collect(),
    }
}

fn worker_pool(cfg: &DeConfig) -> Result<Option<rayon::ThreadPool>> {
    if !cfg.parallel {
        return Ok(None);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var("SLOSHSIM_THREADS") {
        match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => builder = builder.num_threads(n),
            _ => {
                return Err(Error::validation(format!(
                    "SLOSHSIM_THREADS must be a positive integer, got {s:?}"
                )))
            }
        }
    }
    let pool = builder
        .build()
        .map_err(|e| Error::numerical(format!("could not build worker pool: {e}")))?;
    Ok(Some(pool))
}

/// Minimize `f` over the box `bounds` with rand/1/bin differential
/// evolution. `f` must be deterministic; non-finite values are treated as
/// infinitely bad.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], cfg: &DeConfig) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::validation("optimization needs at least one parameter"));
    }
    for (lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation(format!(
                "invalid parameter bounds [{lo}, {hi}]"
            )));
        }
    }
    if !(0.0..=1.0).contains(&cfg.crossover) {
        return Err(Error::validation("crossover probability must be in [0, 1]"));
    }
    let (w_lo, w_hi) = cfg.differential_weight;
    if !(w_lo.is_finite() && w_hi.is_finite() && 0.0 < w_lo && w_lo < w_hi) {
        return Err(Error::validation("differential weight range must be 0 < lo < hi"));
    }

    let np = if cfg.population == 0 {
        15 * dim
    } else {
        cfg.population.max(4)
    };
    let pool = worker_pool(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            bounds
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..*hi))
                .collect()
        })
        .collect();
    let mut vals = eval_population(&f, pool.as_ref(), &pop);
    let mut evaluations = np as u64;

    let best_of = |vals: &[f64]| -> usize {
        let mut b = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v < vals[b] {
                b = i;
            }
        }
        b
    };

    let mut generations = 0;
    let mut converged = false;
    for _ in 0..cfg.max_generations {
        let spread = {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in &vals {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
            hi - lo
        };
        if spread < cfg.tol_spread || cfg.target.is_some_and(|t| vals[best_of(&vals)] <= t) {
            converged = true;
            break;
        }

        // Sequential trial generation keeps the RNG stream independent of
        // the evaluation schedule.
        let mut trials: Vec<Vec<f64>> = Vec::with_capacity(np);
        for i in 0..np {
            let mut pick = || loop {
                let r = rng.random_range(0..np);
                if r != i {
                    return r;
                }
            };
            let (r0, r1, r2) = loop {
                let a = pick();
                let b = pick();
                let c = pick();
                if a != b && b != c && a != c {
                    break (a, b, c);
                }
            };
            let w = rng.random_range(w_lo..w_hi);
            let j_rand = rng.random_range(0..dim);
            let mut trial = pop[i].clone();
            for j in 0..dim {
                if j == j_rand || rng.random_range(0.0..1.0) < cfg.crossover {
                    let v = pop[r0][j] + w * (pop[r1][j] - pop[r2][j]);
                    trial[j] = v.clamp(bounds[j].0, bounds[j].1);
                }
            }
            trials.push(trial);
        }

        let trial_vals = eval_population(&f, pool.as_ref(), &trials);
        evaluations += np as u64;
        for i in 0..np {
            // Ties replace the parent so plateaus keep drifting.
            if trial_vals[i] <= vals[i] {
                pop[i] = std::mem::take(&mut trials[i]);
                vals[i] = trial_vals[i];
            }
        }
        generations += 1;
    }
    if !converged {
        // The cap landing exactly on a converged population still counts.
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in &vals {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        converged = hi - lo < cfg.tol_spread
            || cfg.target.is_some_and(|t| lo <= t);
    }

    let b = best_of(&vals);
    Ok(DeResult {
        best: pop[b].clone(),
        best_value: vals[b],
        generations,
        evaluations,
        converged,
    })
}
