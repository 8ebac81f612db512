//! Multi-start Nelder–Mead minimization.
//!
//! Restarts are independent and run on the rayon pool. Each restart draws its
//! start point from its own seed, so the combined result does not depend on
//! scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qstate::{derive_seed, rng_from_seed};

/// Settings shared by every optimizer-backed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Stop a restart when the spread of simplex values falls below this.
    pub tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// Also search rank-1 POVMs via a Naimark dilation.
    pub povm: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 20, tol: 1e-9, max_evals: 2000, seed: 0x5eed, povm: false }
    }
}

impl OptimizerConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Standard Nelder–Mead with reflection 1, expansion 2, contraction ½, shrink ½.
pub fn nelder_mead<F>(f: &F, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let n = x0.len();
    if n == 0 {
        return Minimum { x: vec![], value: f(x0), evals: 1, converged: true };
    }
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut converged = false;

    while evals.get() < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[n] - values[0] <= tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect()
        };

        let reflected = along(-1.0);
        let f_r = eval(&reflected);
        if f_r < values[0] {
            let expanded = along(-2.0);
            let f_e = eval(&expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[n] {
            let c = along(-0.5);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(0.5);
            let v = eval(&c);
            (c, v)
        };
        if f_c < values[n].min(f_r) {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (xi, bi) in simplex[i].iter_mut().zip(&best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    Minimum { x: simplex[best].clone(), value: values[best], evals: evals.get(), converged }
}

/// Runs `cfg.restarts` Nelder–Mead searches and keeps the best. Restart 0
/// starts at the origin, the others uniformly in `[-π, π]^n`.
pub fn multistart<F>(f: &F, n_params: usize, cfg: &OptimizerConfig, direction: Direction) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let sign = match direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let signed = |x: &[f64]| sign * f(x);
    let restarts = cfg.restarts.max(1);
    let results: Vec<Minimum> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let x0: Vec<f64> = if k == 0 {
                vec![0.0; n_params]
            } else {
                let mut rng = rng_from_seed(derive_seed(cfg.seed, k as u64));
                (0..n_params).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
            };
            nelder_mead(&signed, &x0, 0.5, cfg.tol, cfg.max_evals)
        })
        .collect();
    let evals = results.iter().map(|m| m.evals).sum();
    let mut best = results
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart");
    best.value *= sign;
    best.evals = evals;
    best
}
