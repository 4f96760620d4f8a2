#![allow(dead_code)]

use chantopo::ingest::Ecosystem;
use chantopo::mapper::{shared_point_edges, ClusterNode, NerveGraph};
use chantopo::normalize::FeatureMatrix;

/// Matrix whose rows are given directly; ids `p<i>`.
pub fn matrix(rows: Vec<Vec<f64>>, channels: &[&str], stars: Vec<u64>) -> FeatureMatrix {
    let n = rows.len();
    FeatureMatrix::from_rows(
        rows,
        (0..n).map(|i| format!("p{i}")).collect(),
        channels.iter().map(|s| s.to_string()).collect(),
        vec![Ecosystem::Npm; n],
        stars,
    )
    .unwrap()
}

/// Nerve over explicit node member lists, edges from shared points.
pub fn graph(members: Vec<Vec<usize>>, m: &FeatureMatrix) -> NerveGraph {
    let refs: Vec<&[usize]> = members.iter().map(Vec::as_slice).collect();
    let edges = shared_point_edges(&refs, m.n_rows());
    let nodes = members
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            let d = m.n_cols();
            let means = (0..d)
                .map(|j| members.iter().map(|&p| m.get(p, j)).sum::<f64>() / members.len() as f64)
                .collect();
            ClusterNode {
                id,
                bin_id: id,
                bin_center: [id as f64, 0.0],
                size: members.len(),
                feature_means: means,
                star_median: 0.0,
                members,
            }
        })
        .collect();
    NerveGraph {
        channels: m.col_index().to_vec(),
        point_ids: m.row_index().to_vec(),
        point_stars: m.stars().to_vec(),
        nodes,
        edges,
    }
}
