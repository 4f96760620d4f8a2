//! Exact t-SNE: O(n²) per iteration, gradient descent on KL(P‖Q) with a
//! Student-t output kernel, early exaggeration, momentum and per-coordinate
//! adaptive gains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conditional_affinities, AffinityMatrix, EmbedMethod, FilterEmbedding};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub momentum_early: f64,
    pub momentum_late: f64,
    /// iteration at which momentum switches from early to late
    pub momentum_switch: usize,
    pub exaggeration_factor: f64,
    /// number of leading iterations run with exaggerated affinities
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            momentum_early: 0.5,
            momentum_late: 0.8,
            momentum_switch: 250,
            exaggeration_factor: 12.0,
            exaggeration_iterations: 250,
            seed: 0,
        }
    }
}

impl TsneParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::arg(m));
        if n < 3 {
            return bad(format!("t-SNE needs at least 3 points, got {n}"));
        }
        if !(self.perplexity > 1.0 && self.perplexity < n as f64) {
            return bad(format!("perplexity must lie in (1, {n}), got {}", self.perplexity));
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        for m in [self.momentum_early, self.momentum_late] {
            if !(0.0..1.0).contains(&m) {
                return bad(format!("momentum must lie in [0, 1), got {m}"));
            }
        }
        if !(self.exaggeration_factor >= 1.0 && self.exaggeration_factor.is_finite()) {
            return bad(format!("exaggeration must be >= 1, got {}", self.exaggeration_factor));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneRun {
    pub embedding: FilterEmbedding,
    /// KL divergence (unexaggerated P) once the exaggeration phase ended.
    pub kl_after_exaggeration: f64,
    /// `(iteration, KL)` every 100 iterations and at the last one.
    pub kl_trace: Vec<(usize, f64)>,
    pub saturated_rows: Vec<usize>,
}

/// Unnormalized Student-t kernel row sums, summed in row order.
fn kernel_total(y: &[[f64; 2]]) -> f64 {
    let row_sums: Vec<f64> = (0..y.len())
        .into_par_iter()
        .map(|i| {
            let [xi, yi] = y[i];
            y.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &[xj, yj])| 1.0 / (1.0 + (xi - xj).powi(2) + (yi - yj).powi(2)))
                .sum()
        })
        .collect();
    row_sums.iter().sum()
}

/// KL(P‖Q) for embedding `y`, skipping zero affinities.
pub fn kl_divergence(p: &AffinityMatrix, y: &[[f64; 2]]) -> f64 {
    let z = kernel_total(y);
    let rows: Vec<f64> = (0..y.len())
        .into_par_iter()
        .map(|i| {
            let [xi, yi] = y[i];
            p.row(i)
                .iter()
                .zip(y)
                .enumerate()
                .filter(|&(j, (&pij, _))| j != i && pij > 0.0)
                .map(|(_, (&pij, &[xj, yj]))| {
                    let q = 1.0 / (1.0 + (xi - xj).powi(2) + (yi - yj).powi(2)) / z;
                    pij * (pij / q).ln()
                })
                .sum()
        })
        .collect();
    rows.iter().sum()
}

/// Gradient of KL(αP‖Q) with respect to every output coordinate.
pub fn kl_gradient(p: &AffinityMatrix, y: &[[f64; 2]], exaggeration: f64) -> Vec<[f64; 2]> {
    let z = kernel_total(y);
    (0..y.len())
        .into_par_iter()
        .map(|i| {
            let [xi, yi] = y[i];
            let mut g = [0.0, 0.0];
            for (j, (&pij, &[xj, yj])) in p.row(i).iter().zip(y).enumerate() {
                if j == i {
                    continue;
                }
                let (dx, dy) = (xi - xj, yi - yj);
                let w = 1.0 / (1.0 + dx * dx + dy * dy);
                let coef = (exaggeration * pij - w / z) * w;
                g[0] += coef * dx;
                g[1] += coef * dy;
            }
            [4.0 * g[0], 4.0 * g[1]]
        })
        .collect()
}

fn initial_coords(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect()
}

pub fn tsne(points: &[Vec<f64>], params: &TsneParams) -> Result<TsneRun> {
    params.validate(points.len())?;
    let p = conditional_affinities(points, params.perplexity)?;
    tsne_with_affinities(&p, params)
}

/// Runs the optimizer on precomputed affinities.
pub fn tsne_with_affinities(p: &AffinityMatrix, params: &TsneParams) -> Result<TsneRun> {
    let n = p.n();
    params.validate(n)?;
    let mut y = initial_coords(n, params.seed);
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_trace = Vec::new();
    let mut kl_after_exaggeration = None;

    for iter in 0..params.iterations {
        let exaggeration = if iter < params.exaggeration_iterations {
            params.exaggeration_factor
        } else {
            1.0
        };
        let momentum = if iter < params.momentum_switch {
            params.momentum_early
        } else {
            params.momentum_late
        };
        let grad = kl_gradient(p, &y, exaggeration);
        if grad.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: iter });
        }
        for ((yi, (ui, gi)), gr) in y.iter_mut().zip(update.iter_mut().zip(gains.iter_mut())).zip(&grad) {
            for d in 0..2 {
                gi[d] = if (gr[d] > 0.0) != (ui[d] > 0.0) {
                    gi[d] + 0.2
                } else {
                    (gi[d] * 0.8).max(0.01)
                };
                ui[d] = momentum * ui[d] - params.learning_rate * gi[d] * gr[d];
                yi[d] += ui[d];
            }
        }
        let mean = y
            .iter()
            .fold([0.0, 0.0], |acc, c| [acc[0] + c[0], acc[1] + c[1]]);
        let mean = [mean[0] / n as f64, mean[1] / n as f64];
        for c in &mut y {
            c[0] -= mean[0];
            c[1] -= mean[1];
        }

        let done = iter + 1;
        if done == params.exaggeration_iterations {
            kl_after_exaggeration = Some(kl_divergence(p, &y));
        }
        if done % 100 == 0 || done == params.iterations {
            let kl = kl_divergence(p, &y);
            log::debug!("t-SNE iteration {done}: KL {kl:.6}");
            kl_trace.push((done, kl));
        }
    }

    let final_kl = kl_trace.last().map(|&(_, kl)| kl).expect("at least one iteration");
    if !final_kl.is_finite() {
        return Err(Error::Numerical(format!("final KL divergence is {final_kl}")));
    }
    Ok(TsneRun {
        embedding: FilterEmbedding {
            coords: y,
            method: EmbedMethod::Tsne,
            final_objective: final_kl,
        },
        kl_after_exaggeration: kl_after_exaggeration.unwrap_or(final_kl),
        kl_trace,
        saturated_rows: p.saturated_rows.clone(),
    })
}
