use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_rectangular, EmbedMethod, FilterEmbedding};
use crate::error::{Error, Result};

/// Principal components of a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// Projection of each centered row onto the components (n × k).
    pub scores: Vec<Vec<f64>>,
    /// Unit component vectors, decreasing variance (k × d).
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub mean: Vec<f64>,
}

impl PcaResult {
    pub fn cumulative_ratio(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    /// First two score columns as filter coordinates (`y = 0` when k = 1).
    pub fn embedding(&self) -> FilterEmbedding {
        FilterEmbedding {
            coords: self
                .scores
                .iter()
                .map(|s| [s[0], s.get(1).copied().unwrap_or(0.0)])
                .collect(),
            method: EmbedMethod::Pca,
            final_objective: self.cumulative_ratio(),
        }
    }
}

/// Extends orthonormal `basis` (columns of length `d`) to `target` vectors
/// by Gram–Schmidt over the standard basis.
fn complete_basis(mut basis: Vec<DVector<f64>>, d: usize, target: usize) -> Vec<DVector<f64>> {
    let mut e = 0;
    while basis.len() < target && e < d {
        let mut v = DVector::zeros(d);
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
        e += 1;
    }
    basis
}

/// PCA through the SVD of the mean-centered data. Each component is
/// oriented so its largest-magnitude loading is positive.
pub fn pca(points: &[Vec<f64>], k: usize) -> Result<PcaResult> {
    let d = check_rectangular(points)?;
    let n = points.len();
    if k == 0 {
        return Err(Error::arg("PCA needs k >= 1"));
    }
    if n == 0 {
        return Err(Error::arg("PCA needs at least one row"));
    }
    if k > d {
        return Err(Error::arg(format!("k = {k} exceeds the {d} input columns")));
    }

    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let total_ss = centered.iter().map(|v| v * v).sum::<f64>();

    let svd = centered.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let mut basis: Vec<DVector<f64>> = order
        .iter()
        .map(|&r| v_t.row(r).transpose().into_owned())
        .collect();
    let mut sv: Vec<f64> = order.iter().map(|&r| svd.singular_values[r]).collect();
    if basis.len() < k {
        basis = complete_basis(basis, d, k);
        sv.resize(basis.len(), 0.0);
    }
    basis.truncate(k);
    sv.truncate(k);

    for v in &mut basis {
        let lead = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            *v = -v.clone();
        }
    }

    let dof = n.saturating_sub(1).max(1) as f64;
    let explained_variance: Vec<f64> = sv.iter().map(|s| s * s / dof).collect();
    let explained_variance_ratio = sv
        .iter()
        .map(|s| if total_ss > 0.0 { s * s / total_ss } else { 0.0 })
        .collect();

    let scores = (0..n)
        .map(|i| basis.iter().map(|v| centered.row(i).transpose().dot(v)).collect())
        .collect();

    Ok(PcaResult {
        scores,
        components: basis.iter().map(|v| v.iter().copied().collect()).collect(),
        explained_variance,
        explained_variance_ratio,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_data_has_one_component() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let r = pca(&pts, 2).unwrap();
        assert!((r.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(r.explained_variance_ratio[1].abs() < 1e-12);
        let c = &r.components[0];
        let s = 5f64.sqrt();
        assert!((c[0] - 1.0 / s).abs() < 1e-12 && (c[1] - 2.0 / s).abs() < 1e-12);
    }

    #[test]
    fn full_rank_reconstructs() {
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|i| {
                let t = i as f64;
                vec![t.sin(), (2.0 * t).cos(), t * 0.1, (t * 0.3).exp()]
            })
            .collect();
        let r = pca(&pts, 4).unwrap();
        for (i, p) in pts.iter().enumerate() {
            for j in 0..4 {
                let x: f64 = r.mean[j] + (0..4).map(|c| r.scores[i][c] * r.components[c][j]).sum::<f64>();
                assert!((x - p[j]).abs() < 1e-8);
            }
        }
        assert!((r.cumulative_ratio() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fewer_rows_than_columns_still_orthonormal() {
        let pts = vec![vec![1.0, 0.0, 0.0, 2.0], vec![0.0, 1.0, 0.5, 0.0]];
        let r = pca(&pts, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = (0..4).map(|j| r.components[a][j] * r.components[b][j]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let pts = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert!(pca(&pts, 0).is_err());
        assert!(pca(&pts, 3).is_err());
        assert!(pca(&[], 1).is_err());
    }

    #[test]
    fn constant_data_has_zero_ratios() {
        let pts = vec![vec![1.0, 1.0]; 4];
        let r = pca(&pts, 2).unwrap();
        assert_eq!(r.explained_variance_ratio, [0.0, 0.0]);
    }
}
