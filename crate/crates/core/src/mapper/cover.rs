use serde::{Deserialize, Serialize};

use crate::embed::FilterEmbedding;
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` on one filter axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Axis-aligned box of the cover; one interval per filter axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub id: usize,
    /// window index along each axis
    pub grid: Vec<usize>,
    pub ranges: Vec<Interval>,
}

impl Bin {
    pub fn contains(&self, p: &[f64; 2]) -> bool {
        self.ranges.iter().zip(p).all(|(r, &x)| r.contains(x))
    }

    /// Center in filter space; the second coordinate is 0 for 1-D covers.
    pub fn center(&self) -> [f64; 2] {
        [
            self.ranges[0].center(),
            self.ranges.get(1).map_or(0.0, Interval::center),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub dimension: usize,
    pub intervals_per_axis: usize,
    pub overlap_fraction: f64,
    /// windows along each axis
    pub axes: Vec<Vec<Interval>>,
    /// grid product of the axis windows, first axis outermost
    pub bins: Vec<Bin>,
}

/// `k` equal-width windows over `[min, max]`, consecutive ones sharing
/// `overlap` of their width. The width solves `w·(1−g)·(k−1) + w = max − min`.
pub fn axis_windows(min: f64, max: f64, k: usize, overlap: f64) -> Vec<Interval> {
    let range = max - min;
    if range <= 0.0 {
        return vec![Interval { lo: min, hi: max }];
    }
    let width = range / (1.0 + (1.0 - overlap) * (k as f64 - 1.0));
    let step = width * (1.0 - overlap);
    (0..k)
        .map(|i| {
            let lo = if i == 0 { min } else { min + i as f64 * step };
            let hi = if i + 1 == k { max } else { lo + width };
            Interval { lo, hi }
        })
        .collect()
}

pub fn build_cover(
    embedding: &FilterEmbedding,
    intervals: usize,
    overlap: f64,
    dimension: usize,
) -> Result<Cover> {
    if intervals == 0 {
        return Err(Error::arg("cover needs at least one interval per axis"));
    }
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(Error::arg(format!("overlap must lie in (0, 1), got {overlap}")));
    }
    if !(dimension == 1 || dimension == 2) {
        return Err(Error::arg(format!("cover dimension must be 1 or 2, got {dimension}")));
    }
    if embedding.is_empty() {
        return Err(Error::arg("cannot cover an empty embedding"));
    }
    if embedding.coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::arg("embedding has non-finite coordinates"));
    }

    let axes: Vec<Vec<Interval>> = (0..dimension)
        .map(|a| {
            let (min, max) = embedding
                .coords
                .iter()
                .map(|c| c[a])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            axis_windows(min, max, intervals, overlap)
        })
        .collect();

    let mut bins = Vec::new();
    let mut grid = vec![0usize; dimension];
    loop {
        bins.push(Bin {
            id: bins.len(),
            grid: grid.clone(),
            ranges: grid.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect(),
        });
        // odometer increment, last axis fastest
        let mut a = dimension;
        loop {
            if a == 0 {
                return Ok(Cover {
                    dimension,
                    intervals_per_axis: intervals,
                    overlap_fraction: overlap,
                    axes,
                    bins,
                });
            }
            a -= 1;
            grid[a] += 1;
            if grid[a] < axes[a].len() {
                break;
            }
            grid[a] = 0;
        }
    }
}

impl Cover {
    /// Points falling in each bin, ascending by point index.
    pub fn assign(&self, coords: &[[f64; 2]]) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.bins.len()];
        let strides: Vec<usize> = (0..self.dimension)
            .map(|a| self.axes[a + 1..].iter().map(Vec::len).product())
            .collect();
        for (p, c) in coords.iter().enumerate() {
            let per_axis: Vec<Vec<usize>> = self
                .axes
                .iter()
                .enumerate()
                .map(|(a, ax)| (0..ax.len()).filter(|&i| ax[i].contains(c[a])).collect())
                .collect();
            let mut ids = vec![0usize];
            for (hits, &stride) in per_axis.iter().zip(&strides) {
                ids = ids
                    .iter()
                    .flat_map(|&base| hits.iter().map(move |&i| base + i * stride))
                    .collect();
            }
            for id in ids {
                members[id].push(p);
            }
        }
        members
    }
}
