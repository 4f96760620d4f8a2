use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mapper::NerveGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Fruchterman-Reingold spring layout
    ForceDirected,
    /// nodes at their cover bin centers
    BinGrid,
}

impl std::str::FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "force-directed" | "force" => Ok(Layout::ForceDirected),
            "bin-grid" | "grid" => Ok(Layout::BinGrid),
            _ => Err(format!("unknown layout {s:?} (force-directed, bin-grid)")),
        }
    }
}

/// Rescales points into the unit square, keeping aspect; a single point or
/// coincident points land in the middle.
fn fit_unit(mut pos: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pos {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    for p in &mut pos {
        for d in 0..2 {
            p[d] = if span > 0.0 {
                (p[d] - lo[d]) / span + 0.5 * (1.0 - (hi[d] - lo[d]) / span)
            } else {
                0.5
            };
        }
    }
    pos
}

const GRAVITY: f64 = 1.0;

/// Node positions in `[0, 1]²`, deterministic for a seed.
pub fn force_directed_layout(graph: &NerveGraph, seed: u64, iterations: usize) -> Vec<[f64; 2]> {
    let n = graph.nodes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    if n < 2 {
        return fit_unit(pos);
    }
    let k = (1.0 / n as f64).sqrt();
    for it in 0..iterations {
        let temp = 0.1 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in i + 1..n {
                let dx = pos[i][0] - pos[j][0];
                let dy = pos[i][1] - pos[j][1];
                let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = k * k / dist;
                disp[i][0] += dx / dist * f;
                disp[i][1] += dy / dist * f;
                disp[j][0] -= dx / dist * f;
                disp[j][1] -= dy / dist * f;
            }
        }
        for e in &graph.edges {
            let dx = pos[e.a][0] - pos[e.b][0];
            let dy = pos[e.a][1] - pos[e.b][1];
            let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = dist * dist / k;
            disp[e.a][0] -= dx / dist * f;
            disp[e.a][1] -= dy / dist * f;
            disp[e.b][0] += dx / dist * f;
            disp[e.b][1] += dy / dist * f;
        }
        for (p, d) in pos.iter_mut().zip(disp.iter_mut()) {
            // weak pull to the centre keeps components from drifting apart
            d[0] -= GRAVITY * (p[0] - 0.5);
            d[1] -= GRAVITY * (p[1] - 0.5);
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-12);
            let step = len.min(temp);
            p[0] += d[0] / len * step;
            p[1] += d[1] / len * step;
        }
    }
    fit_unit(pos)
}

/// Bin centers, with nodes of a shared bin jittered by up to `jitter`
/// (fraction of the unit square).
pub fn bin_grid_layout(graph: &NerveGraph, seed: u64, jitter: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = fit_unit(graph.nodes.iter().map(|n| n.bin_center).collect());
    let mut per_bin = std::collections::BTreeMap::<usize, usize>::new();
    for n in &graph.nodes {
        *per_bin.entry(n.bin_id).or_default() += 1;
    }
    graph
        .nodes
        .iter()
        .zip(centers)
        .map(|(n, c)| {
            let (jx, jy) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            if per_bin[&n.bin_id] > 1 {
                [(c[0] + jitter * jx).clamp(0.0, 1.0), (c[1] + jitter * jy).clamp(0.0, 1.0)]
            } else {
                c
            }
        })
        .collect()
}
