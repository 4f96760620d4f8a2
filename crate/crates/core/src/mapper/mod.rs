//! Mapper: overlapping cover of the filter, per-bin clustering, nerve.

mod cluster;
mod cover;
mod nerve;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cluster::{cluster_bin, diameter, minimum_spanning_tree, DEFAULT_HISTOGRAM_BINS};
pub use cover::{axis_windows, build_cover, Bin, Cover, Interval};
pub use nerve::{
    build_nerve, color_by_feature, shared_point_edges, BinClusters, ClusterNode, NerveEdge,
    NerveGraph,
};

use crate::embed::FilterEmbedding;
use crate::error::{Error, Result};
use crate::normalize::FeatureMatrix;

/// Space in which points of a bin are clustered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterSpace {
    /// normalized channel features
    Features,
    /// 2-D filter coordinates
    Embedding,
}

impl std::str::FromStr for ClusterSpace {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "features" => Ok(ClusterSpace::Features),
            "embedding" => Ok(ClusterSpace::Embedding),
            _ => Err(format!("unknown cluster space {s:?} (features, embedding)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapperParams {
    pub intervals: usize,
    pub overlap: f64,
    pub dimension: usize,
    pub cluster_space: ClusterSpace,
    pub histogram_bins: usize,
    /// clusters smaller than this are dropped
    pub min_node_size: usize,
}

impl Default for MapperParams {
    fn default() -> Self {
        MapperParams {
            intervals: 10,
            overlap: 0.5,
            dimension: 2,
            cluster_space: ClusterSpace::Features,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            min_node_size: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperOutput {
    pub cover: Cover,
    pub graph: NerveGraph,
}

/// Covers `embedding`, clusters every bin and builds the nerve.
pub fn run_mapper(
    matrix: &FeatureMatrix,
    embedding: &FilterEmbedding,
    params: &MapperParams,
) -> Result<MapperOutput> {
    if matrix.n_rows() != embedding.len() {
        return Err(Error::arg(format!(
            "{} matrix rows but {} embedded points",
            matrix.n_rows(),
            embedding.len()
        )));
    }
    let cover = build_cover(embedding, params.intervals, params.overlap, params.dimension)?;
    let bin_points = cover.assign(&embedding.coords);
    let clusters: Vec<BinClusters> = bin_points
        .par_iter()
        .enumerate()
        .map(|(bin_id, pts)| {
            let local: Vec<&[f64]> = pts
                .iter()
                .map(|&p| match params.cluster_space {
                    ClusterSpace::Features => matrix.row(p),
                    ClusterSpace::Embedding => &embedding.coords[p][..],
                })
                .collect();
            let clusters = cluster_bin(&local, params.histogram_bins)
                .into_iter()
                .filter(|c| c.len() >= params.min_node_size)
                .map(|c| c.into_iter().map(|i| pts[i]).collect())
                .collect();
            BinClusters { bin_id, clusters }
        })
        .collect();
    let graph = build_nerve(&cover, &clusters, matrix)?;
    Ok(MapperOutput { cover, graph })
}
