//! Single-linkage clustering of one cover bin, cut at the first gap of
//! the merge-height histogram. The histogram spans `[0, diameter]` of the
//! bin's points, so a dense cloud lands in the first bin and stays whole.

/// Default number of histogram bins for the gap heuristic.
pub const DEFAULT_HISTOGRAM_BINS: usize = 10;

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum spanning tree edges `(u, v, length)` by Prim's algorithm. The
/// edge lengths are exactly the single-linkage merge heights.
pub fn minimum_spanning_tree(points: &[&[f64]]) -> Vec<(usize, usize, f64)> {
    let m = points.len();
    if m < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    let mut parent = vec![0usize; m];
    let mut edges = Vec::with_capacity(m - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..m {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..m {
            if in_tree[v] {
                continue;
            }
            let d = distance(points[current], points[v]);
            if d < best[v] {
                best[v] = d;
                parent[v] = current;
            }
            if best[v] < next_d || next == usize::MAX {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_d));
        current = next;
    }
    edges
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Largest pairwise distance.
pub fn diameter(points: &[&[f64]]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(distance(a, b));
        }
    }
    d
}

/// Index of the first empty bin of the edge-length histogram over
/// `[0, diameter]`, with the slot of every edge. `None` when no bin is
/// empty or the diameter is at rounding level.
fn first_gap(lengths: &[f64], diameter: f64, bins: usize) -> Option<(usize, Vec<usize>)> {
    if !(diameter > 1e-12) || bins < 2 || lengths.is_empty() {
        return None;
    }
    let width = diameter / bins as f64;
    let slot: Vec<usize> = lengths
        .iter()
        .map(|&l| ((l / width) as usize).min(bins - 1))
        .collect();
    let mut counts = vec![0usize; bins];
    for &s in &slot {
        counts[s] += 1;
    }
    counts.iter().position(|&c| c == 0).map(|gap| (gap, slot))
}

/// Clusters the points of one bin. Returns member lists of local indices,
/// each sorted, ordered by smallest member. An empty bin yields no clusters.
pub fn cluster_bin(points: &[&[f64]], histogram_bins: usize) -> Vec<Vec<usize>> {
    let m = points.len();
    if m == 0 {
        return Vec::new();
    }
    let mst = minimum_spanning_tree(points);
    let lengths: Vec<f64> = mst.iter().map(|e| e.2).collect();
    let mut sets = DisjointSet::new(m);
    match first_gap(&lengths, diameter(points), histogram_bins) {
        Some((gap, slot)) => {
            for (&(u, v, _), &s) in mst.iter().zip(&slot) {
                if s < gap {
                    sets.union(u, v);
                }
            }
        }
        None => {
            for &(u, v, _) in &mst {
                sets.union(u, v);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..m {
        let r = sets.find(i);
        groups.entry(r).or_default().push(i);
    }
    // roots are the smallest index of their set, so map order = smallest member order
    groups.into_values().collect()
}
