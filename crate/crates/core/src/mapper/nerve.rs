use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cover::Cover;
use crate::error::{Error, Result};
use crate::ingest::lower_median;
use crate::normalize::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    pub id: usize,
    pub bin_id: usize,
    /// center of the cover bin in filter space
    pub bin_center: [f64; 2],
    /// point indices, ascending
    pub members: Vec<usize>,
    pub size: usize,
    /// mean normalized value per graph channel
    pub feature_means: Vec<f64>,
    pub star_median: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NerveEdge {
    pub a: usize,
    pub b: usize,
    pub shared_count: usize,
}

/// Mapper output: one node per in-bin cluster, an edge wherever two
/// clusters share a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerveGraph {
    /// channel names, aligned with every node's `feature_means`
    pub channels: Vec<String>,
    /// project id of each point index
    pub point_ids: Vec<String>,
    pub point_stars: Vec<u64>,
    pub nodes: Vec<ClusterNode>,
    pub edges: Vec<NerveEdge>,
}

/// Clusters found in one bin, as point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinClusters {
    pub bin_id: usize,
    pub clusters: Vec<Vec<usize>>,
}

impl NerveGraph {
    pub fn empty(channels: Vec<String>) -> Self {
        NerveGraph {
            channels,
            point_ids: Vec::new(),
            point_stars: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn channel_index(&self, channel: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == channel)
    }

    /// Adjacency lists indexed by node id.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }
}

/// Pairs of nodes sharing at least one point, with the shared count.
pub fn shared_point_edges(members: &[&[usize]], n_points: usize) -> Vec<NerveEdge> {
    let mut nodes_of_point: Vec<Vec<usize>> = vec![Vec::new(); n_points];
    for (node, ms) in members.iter().enumerate() {
        for &p in ms.iter() {
            nodes_of_point[p].push(node);
        }
    }
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for nodes in &nodes_of_point {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                *counts.entry(key).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|((a, b), shared_count)| NerveEdge { a, b, shared_count })
        .collect()
}

/// Assembles the nerve from per-bin clusters. Nodes are ordered by
/// `(bin_id, smallest member)`; node statistics come from `matrix`.
pub fn build_nerve(
    cover: &Cover,
    clusters: &[BinClusters],
    matrix: &FeatureMatrix,
) -> Result<NerveGraph> {
    let n_points = matrix.n_rows();
    let mut raw: Vec<(usize, Vec<usize>)> = Vec::new();
    for bc in clusters {
        let bin = cover
            .bins
            .get(bc.bin_id)
            .ok_or_else(|| Error::arg(format!("cluster list names unknown bin {}", bc.bin_id)))?;
        for c in &bc.clusters {
            if c.is_empty() {
                return Err(Error::arg(format!("empty cluster in bin {}", bin.id)));
            }
            let mut members = c.clone();
            members.sort_unstable();
            members.dedup();
            if let Some(&p) = members.iter().find(|&&p| p >= n_points) {
                return Err(Error::arg(format!("point index {p} outside the {n_points}-row matrix")));
            }
            raw.push((bin.id, members));
        }
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1[0].cmp(&b.1[0])));

    let d = matrix.n_cols();
    let nodes: Vec<ClusterNode> = raw
        .into_iter()
        .enumerate()
        .map(|(id, (bin_id, members))| {
            let mut sums = vec![0.0; d];
            for &p in &members {
                for (s, v) in sums.iter_mut().zip(matrix.row(p)) {
                    *s += v;
                }
            }
            let size = members.len();
            let stars: Vec<u64> = members.iter().map(|&p| matrix.stars()[p]).collect();
            ClusterNode {
                id,
                bin_id,
                bin_center: cover.bins[bin_id].center(),
                feature_means: sums.iter().map(|s| s / size as f64).collect(),
                star_median: lower_median(&stars).unwrap_or(0) as f64,
                size,
                members,
            }
        })
        .collect();

    let member_refs: Vec<&[usize]> = nodes.iter().map(|n| n.members.as_slice()).collect();
    let edges = shared_point_edges(&member_refs, n_points);
    Ok(NerveGraph {
        channels: matrix.col_index().to_vec(),
        point_ids: matrix.row_index().to_vec(),
        point_stars: matrix.stars().to_vec(),
        nodes,
        edges,
    })
}

/// Color scalar per node: the node's mean for `channel`. 1 renders blue
/// (channel present), 0 red (absent).
pub fn color_by_feature(graph: &NerveGraph, channel: &str) -> Result<Vec<f64>> {
    let j = graph
        .channel_index(channel)
        .ok_or_else(|| Error::arg(format!("channel {channel:?} is not in the graph")))?;
    Ok(graph.nodes.iter().map(|n| n.feature_means[j]).collect())
}
