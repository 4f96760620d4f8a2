use rayon::prelude::*;

use super::{check_rectangular, squared_distance};
use crate::error::{Error, Result};

/// Bisection steps allowed per row once the bandwidth is bracketed.
pub const MAX_HALVINGS: usize = 64;

/// Entropy tolerance (nats). Keeps `exp(H)` well inside 1e-3 of the target
/// for any perplexity below 10^4.
const ENTROPY_TOL: f64 = 1e-9;

/// Symmetric joint affinities of the input points.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    p: Vec<f64>,
    /// Gaussian bandwidth per row; 0 when the row collapsed onto its nearest
    /// ties and infinite when it was spread uniformly.
    pub sigmas: Vec<f64>,
    /// Rows whose target perplexity was outside the attainable range; their
    /// conditionals are the corresponding uniform limit.
    pub saturated_rows: Vec<usize>,
}

impl AffinityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// Builds a joint matrix directly; `p` must be row-major `n × n`.
    pub fn from_joint(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::arg(format!("{} entries for a {n}x{n} matrix", p.len())));
        }
        Ok(AffinityMatrix {
            n,
            p,
            sigmas: vec![f64::NAN; n],
            saturated_rows: Vec::new(),
        })
    }
}

struct RowFit {
    probs: Vec<f64>,
    beta: f64,
    saturated: bool,
}

/// Conditional row `p_{.|i}` for precision `beta`, with distances already
/// shifted so their minimum is 0. Returns the entropy in nats.
fn row_at(shifted: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for (j, (&d, o)) in shifted.iter().zip(out.iter_mut()).enumerate() {
        *o = if j == i { 0.0 } else { (-beta * d).exp() };
        sum += *o;
    }
    let mut weighted = 0.0;
    for (j, (&d, o)) in shifted.iter().zip(out.iter_mut()).enumerate() {
        if j != i {
            *o /= sum;
            weighted += d * *o;
        }
    }
    sum.ln() + beta * weighted
}

fn fit_row(points: &[Vec<f64>], i: usize, perplexity: f64) -> Result<RowFit> {
    let n = points.len();
    let dist: Vec<f64> = points.iter().map(|p| squared_distance(&points[i], p)).collect();
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = dist.iter().map(|d| d - dmin).collect();
    let ties = shifted
        .iter()
        .enumerate()
        .filter(|&(j, &d)| j != i && d == 0.0)
        .count();
    let mut probs = vec![0.0; n];

    // Attainable entropy runs from ln(ties) (beta -> inf) to ln(n - 1) (beta = 0).
    if perplexity >= (n - 1) as f64 {
        for (j, p) in probs.iter_mut().enumerate() {
            *p = if j == i { 0.0 } else { 1.0 / (n - 1) as f64 };
        }
        return Ok(RowFit {
            probs,
            beta: 0.0,
            saturated: perplexity > (n - 1) as f64,
        });
    }
    if perplexity <= ties as f64 {
        for (j, p) in probs.iter_mut().enumerate() {
            *p = if j != i && shifted[j] == 0.0 { 1.0 / ties as f64 } else { 0.0 };
        }
        return Ok(RowFit {
            probs,
            beta: f64::INFINITY,
            saturated: perplexity < ties as f64,
        });
    }

    let target = perplexity.ln();
    let entropy = |log_beta: f64, out: &mut [f64]| row_at(&shifted, i, log_beta.exp(), out);

    // Bracket ln(beta) around the scale of the positive distances.
    let mut positive: Vec<f64> = shifted.iter().copied().filter(|&d| d > 0.0).collect();
    let mid = positive.len() / 2;
    let scale = *positive.select_nth_unstable_by(mid, f64::total_cmp).1;
    let start = -scale.ln();
    let (mut lo, mut hi) = (start, start);
    let mut step = 1.0;
    while entropy(lo, &mut probs) < target {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() || step > 1e4 {
            return Err(Error::PerplexityNotConverged { row: i, iterations: 0 });
        }
    }
    step = 1.0;
    while entropy(hi, &mut probs) > target {
        hi += step;
        step *= 2.0;
        if !hi.is_finite() || step > 1e4 {
            return Err(Error::PerplexityNotConverged { row: i, iterations: 0 });
        }
    }

    for _ in 0..MAX_HALVINGS {
        let m = 0.5 * (lo + hi);
        let h = entropy(m, &mut probs);
        if (h - target).abs() < ENTROPY_TOL {
            return Ok(RowFit {
                probs,
                beta: m.exp(),
                saturated: false,
            });
        }
        if h > target {
            lo = m;
        } else {
            hi = m;
        }
    }
    Err(Error::PerplexityNotConverged {
        row: i,
        iterations: MAX_HALVINGS,
    })
}

fn fit_rows(points: &[Vec<f64>], perplexity: f64) -> Result<Vec<RowFit>> {
    let n = points.len();
    check_rectangular(points)?;
    if n < 3 {
        return Err(Error::arg(format!("affinities need at least 3 points, got {n}")));
    }
    if !(perplexity > 1.0 && perplexity < n as f64) {
        return Err(Error::arg(format!(
            "perplexity must lie in (1, {n}), got {perplexity}"
        )));
    }
    (0..n)
        .into_par_iter()
        .map(|i| fit_row(points, i, perplexity))
        .collect()
}

/// Row-major conditional probabilities `p_{j|i}` (row `i` sums to 1).
pub fn conditional_probabilities(points: &[Vec<f64>], perplexity: f64) -> Result<Vec<Vec<f64>>> {
    Ok(fit_rows(points, perplexity)?.into_iter().map(|r| r.probs).collect())
}

/// Gaussian affinities calibrated per row to `perplexity`, symmetrized as
/// `(p_{j|i} + p_{i|j}) / 2n`.
pub fn conditional_affinities(points: &[Vec<f64>], perplexity: f64) -> Result<AffinityMatrix> {
    let n = points.len();
    let rows = fit_rows(points, perplexity)?;
    let mut p = Vec::with_capacity(n * n);
    let mut sigmas = Vec::with_capacity(n);
    let mut saturated_rows = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        p.extend_from_slice(&r.probs);
        sigmas.push((0.5 / r.beta).sqrt());
        if r.saturated {
            saturated_rows.push(i);
        }
    }
    if !saturated_rows.is_empty() {
        log::warn!(
            "{} of {n} rows cannot reach perplexity {perplexity}; using the uniform limit",
            saturated_rows.len()
        );
    }
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in i + 1..n {
            let v = (p[i * n + j] + p[j * n + i]) / denom;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
        p[i * n + i] = 0.0;
    }
    Ok(AffinityMatrix {
        n,
        p,
        sigmas,
        saturated_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_triple_splits_evenly() {
        let h = 3f64.sqrt() / 2.0;
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        // Distances agree only to rounding; force exact equality with a
        // degenerate but exactly equilateral configuration as well.
        let exact = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        for perp in [1.5, 2.0, 2.5] {
            let cond = conditional_probabilities(&exact, perp).unwrap();
            for (i, row) in cond.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert_eq!(v, if i == j { 0.0 } else { 0.5 });
                }
            }
        }
        let cond = conditional_probabilities(&pts, 2.0).unwrap();
        for (i, row) in cond.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert!((v - 0.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn joint_sums_to_one() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos(), i as f64 * 0.01])
            .collect();
        let a = conditional_affinities(&pts, 4.0).unwrap();
        let sum: f64 = a.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for i in 0..12 {
            assert_eq!(a.get(i, i), 0.0);
            for j in 0..12 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }

    #[test]
    fn duplicates_saturate_instead_of_failing() {
        let mut pts = vec![vec![0.0, 0.0]; 8];
        pts.push(vec![1.0, 1.0]);
        pts.push(vec![2.0, 1.0]);
        let a = conditional_affinities(&pts, 3.0).unwrap();
        assert!(a.saturated_rows.contains(&0));
        let sum: f64 = a.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(conditional_affinities(&pts[..2], 1.5).is_err());
        assert!(conditional_affinities(&pts, 3.0).is_err());
        assert!(conditional_affinities(&pts, 1.0).is_err());
    }
}
