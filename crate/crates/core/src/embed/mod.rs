//! Two-dimensional filter functions for the Mapper cover.
//!
//! [`tsne`] is the filter used for topologies; [`pca`] is the linear
//! baseline it is compared against.

mod affinity;
mod pca;
mod tsne;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use affinity::{conditional_affinities, conditional_probabilities, AffinityMatrix, MAX_HALVINGS};
pub use pca::{pca, PcaResult};
pub use tsne::{kl_divergence, kl_gradient, tsne, tsne_with_affinities, TsneParams, TsneRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    Tsne,
    Pca,
}

impl std::str::FromStr for EmbedMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tsne" | "t-sne" => Ok(EmbedMethod::Tsne),
            "pca" => Ok(EmbedMethod::Pca),
            _ => Err(format!("unknown filter {s:?} (tsne, pca)")),
        }
    }
}

/// Filter coordinates, one `[x, y]` per input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEmbedding {
    pub coords: Vec<[f64; 2]>,
    pub method: EmbedMethod,
    /// KL divergence for t-SNE, cumulative explained-variance ratio for PCA.
    pub final_objective: f64,
}

impl FilterEmbedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Writes `id,x,y` rows.
    pub fn write_csv<W: Write>(&self, ids: &[String], out: W) -> Result<()> {
        if ids.len() != self.coords.len() {
            return Err(Error::arg(format!(
                "{} ids for {} embedded points",
                ids.len(),
                self.coords.len()
            )));
        }
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        wtr.write_record(["id", "x", "y"]).map_err(io)?;
        for (id, [x, y]) in ids.iter().zip(&self.coords) {
            wtr.write_record([id.as_str(), &format!("{x:.6}"), &format!("{y:.6}")])
                .map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn save_csv(&self, ids: &[String], path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(ids, std::io::BufWriter::new(file))
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_rectangular(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points.first().map_or(0, Vec::len);
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::arg(format!("row {i} has {} columns, expected {dim}", points[i].len())));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("input contains non-finite values"));
    }
    Ok(dim)
}
