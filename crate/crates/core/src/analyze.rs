//! Cluster ranking, dominant channels, evolution across periods and
//! popular/non-popular grouping over nerve graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::lower_median;
use crate::knowledge::{ChannelRegistry, SeciDimension};
use crate::mapper::NerveGraph;
use crate::normalize::FeatureMatrix;

/// Connected component of the nerve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComponent {
    /// 1 = most points
    pub rank: usize,
    pub node_ids: Vec<usize>,
    /// distinct member points, ascending
    pub point_ids: Vec<usize>,
    pub total_points: usize,
    pub star_median: f64,
}

fn star_median(graph: &NerveGraph, points: &[usize]) -> f64 {
    let stars: Vec<u64> = points.iter().map(|&p| graph.point_stars[p]).collect();
    lower_median(&stars).unwrap_or(0) as f64
}

fn union_points(graph: &NerveGraph, nodes: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = nodes
        .iter()
        .flat_map(|&n| graph.nodes[n].members.iter().copied())
        .collect();
    set.into_iter().collect()
}

/// Components ranked by distinct point count, descending; ties go to the
/// component holding the smaller point index.
pub fn rank_components(graph: &NerveGraph) -> Vec<ClusterComponent> {
    let n = graph.nodes.len();
    let adj = graph.neighbors();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut nodes = Vec::new();
        while let Some(v) = stack.pop() {
            nodes.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        nodes.sort_unstable();
        let point_ids = union_points(graph, &nodes);
        comps.push(ClusterComponent {
            rank: 0,
            total_points: point_ids.len(),
            star_median: star_median(graph, &point_ids),
            node_ids: nodes,
            point_ids,
        });
    }
    comps.sort_by(|a, b| {
        b.total_points
            .cmp(&a.total_points)
            .then_with(|| a.point_ids.first().cmp(&b.point_ids.first()))
    });
    for (i, c) in comps.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    comps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DominanceLevel {
    Absent,
    Dominant,
    StronglyDominant,
}

impl DominanceLevel {
    pub fn symbol(self) -> &'static str {
        match self {
            DominanceLevel::Absent => "−",
            DominanceLevel::Dominant => "✓",
            DominanceLevel::StronglyDominant => "✓✓",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub dominant: f64,
    pub strongly_dominant: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            dominant: 0.5,
            strongly_dominant: 0.8,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if self.dominant > 0.0 && self.strongly_dominant > self.dominant {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "thresholds must satisfy 0 < dominant < strongly dominant, got {} / {}",
                self.dominant, self.strongly_dominant
            )))
        }
    }

    pub fn level(&self, mean: f64) -> DominanceLevel {
        if mean >= self.strongly_dominant {
            DominanceLevel::StronglyDominant
        } else if mean >= self.dominant {
            DominanceLevel::Dominant
        } else {
            DominanceLevel::Absent
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDominance {
    pub channel: String,
    pub mean: f64,
    pub level: DominanceLevel,
}

/// Mean of each channel over `points` (rows of `matrix`), mapped through
/// the thresholds.
pub fn dominant_features(
    points: &[usize],
    matrix: &FeatureMatrix,
    channels: &[String],
    thresholds: &Thresholds,
) -> Result<Vec<ChannelDominance>> {
    thresholds.validate()?;
    if points.is_empty() {
        return Err(Error::arg("dominance of an empty point set is undefined"));
    }
    channels
        .iter()
        .map(|ch| {
            let j = matrix
                .column_of(ch)
                .ok_or_else(|| Error::arg(format!("channel {ch:?} is not a matrix column")))?;
            let sum: f64 = points.iter().map(|&p| matrix.get(p, j)).sum();
            let mean = sum / points.len() as f64;
            Ok(ChannelDominance {
                channel: ch.clone(),
                mean,
                level: thresholds.level(mean),
            })
        })
        .collect()
}

fn dimensions_of(channels: &[String], registry: &ChannelRegistry) -> Result<Vec<SeciDimension>> {
    channels
        .iter()
        .map(|c| {
            registry
                .lookup(c)
                .map(|d| d.dimension)
                .ok_or_else(|| Error::arg(format!("unknown channel {c:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRow {
    pub period: String,
    pub rank: usize,
    pub nodes: usize,
    pub points: usize,
    pub star_median: f64,
    pub dominance: Vec<ChannelDominance>,
}

/// Top components per period with their dominant channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub channels: Vec<String>,
    pub dimensions: Vec<SeciDimension>,
    pub thresholds: Thresholds,
    pub periods: Vec<String>,
    pub rows: Vec<EvolutionRow>,
}

/// `slices` pairs a period label with its graph and matrix; periods are
/// reported in ascending label order.
pub fn evolution_report<'a>(
    slices: impl IntoIterator<Item = (String, &'a NerveGraph, &'a FeatureMatrix)>,
    k: usize,
    channels: &[String],
    registry: &ChannelRegistry,
    thresholds: &Thresholds,
) -> Result<EvolutionReport> {
    if k == 0 {
        return Err(Error::arg("evolution report needs k >= 1"));
    }
    thresholds.validate()?;
    let dimensions = dimensions_of(channels, registry)?;
    let slices: BTreeMap<String, (&NerveGraph, &FeatureMatrix)> =
        slices.into_iter().map(|(p, g, m)| (p, (g, m))).collect();
    let mut rows = Vec::new();
    for (period, (graph, matrix)) in &slices {
        for comp in rank_components(graph).into_iter().take(k) {
            rows.push(EvolutionRow {
                period: period.clone(),
                rank: comp.rank,
                nodes: comp.node_ids.len(),
                points: comp.total_points,
                star_median: comp.star_median,
                dominance: dominant_features(&comp.point_ids, matrix, channels, thresholds)?,
            });
        }
    }
    Ok(EvolutionReport {
        channels: channels.to_vec(),
        dimensions,
        thresholds: *thresholds,
        periods: slices.keys().cloned().collect(),
        rows,
    })
}

/// Formats integers with thousands separators.
fn grouped(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn pad(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(len)))
}

fn lpad(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{}{s}", " ".repeat(width.saturating_sub(len)))
}

impl EvolutionReport {
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = self.channels.iter().map(|c| c.chars().count().max(2)).collect();
        let fixed = ["Period", "Cluster", "#Nodes", "#Points"];
        let fixed_w = [
            self.rows.iter().map(|r| r.period.len()).max().unwrap_or(0).max(6),
            7,
            self.rows.iter().map(|r| grouped(r.nodes).len()).max().unwrap_or(0).max(6),
            self.rows.iter().map(|r| grouped(r.points).len()).max().unwrap_or(0).max(7),
        ];
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Dominant channels per cluster (✓ mean >= {:.2}, ✓✓ mean >= {:.2}, − otherwise)",
            self.thresholds.dominant, self.thresholds.strongly_dominant
        );
        out.push('\n');

        // dimension header spans consecutive channels of the same dimension
        let mut dim_line = fixed_w.iter().map(|w| " ".repeat(*w)).collect::<Vec<_>>().join(" | ");
        let mut i = 0;
        while i < self.channels.len() {
            let dim = self.dimensions[i];
            let mut j = i;
            let mut span = 0;
            while j < self.channels.len() && self.dimensions[j] == dim {
                span += widths[j] + if j > i { 3 } else { 0 };
                j += 1;
            }
            dim_line.push_str(" | ");
            dim_line.push_str(&pad(&dim.to_string(), span));
            i = j;
        }
        let _ = writeln!(out, "{}", dim_line.trim_end());

        let mut header: Vec<String> = fixed.iter().zip(fixed_w).map(|(h, w)| pad(h, w)).collect();
        header.extend(self.channels.iter().zip(&widths).map(|(c, &w)| pad(c, w)));
        let _ = writeln!(out, "{}", header.join(" | ").trim_end());
        let rule: usize = header.iter().map(|h| h.chars().count()).sum::<usize>() + 3 * (header.len() - 1);
        let _ = writeln!(out, "{}", "-".repeat(rule));

        let mut last_period = None;
        for r in &self.rows {
            let period = if last_period == Some(&r.period) { "" } else { r.period.as_str() };
            last_period = Some(&r.period);
            let mut cells = vec![
                pad(period, fixed_w[0]),
                lpad(&r.rank.to_string(), fixed_w[1]),
                lpad(&grouped(r.nodes), fixed_w[2]),
                lpad(&grouped(r.points), fixed_w[3]),
            ];
            cells.extend(r.dominance.iter().zip(&widths).map(|(d, &w)| pad(d.level.symbol(), w)));
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["period", "cluster", "nodes", "points", "star_median"];
        header.extend(self.channels.iter().map(String::as_str));
        wtr.write_record(&header).expect("in-memory CSV write");
        for r in &self.rows {
            let mut rec = vec![
                r.period.clone(),
                r.rank.to_string(),
                r.nodes.to_string(),
                r.points.to_string(),
                format!("{}", r.star_median),
            ];
            rec.extend(r.dominance.iter().map(|d| d.level.symbol().to_owned()));
            wtr.write_record(&rec).expect("in-memory CSV write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory CSV flush")).expect("UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityGroup {
    /// `Popular`, `NonPopular1`, `NonPopular2`, ...
    pub label: String,
    /// component rank, or neighborhood order in fallback mode
    pub rank: usize,
    pub node_ids: Vec<usize>,
    pub total_points: usize,
    pub star_median: f64,
    pub dominance: Vec<ChannelDominance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityReport {
    pub channels: Vec<String>,
    pub dimensions: Vec<SeciDimension>,
    pub thresholds: Thresholds,
    pub groups: Vec<PopularityGroup>,
    /// groups are node neighborhoods because one component dominated
    pub fallback: bool,
    pub warning: Option<String>,
}

pub const POPULARITY_CANDIDATES: usize = 3;

/// Share of all points above which a single component is split into node
/// neighborhoods instead.
pub const DOMINANT_COMPONENT_SHARE: f64 = 0.9;

struct Candidate {
    rank: usize,
    node_ids: Vec<usize>,
    point_ids: Vec<usize>,
    star_median: f64,
}

/// Greedy neighborhoods around the largest nodes: a node that already lies
/// in a chosen neighborhood cannot seed another.
fn node_neighborhoods(graph: &NerveGraph, k: usize) -> Vec<Candidate> {
    let adj = graph.neighbors();
    let mut order: Vec<usize> = (0..graph.nodes.len()).collect();
    order.sort_by(|&a, &b| graph.nodes[b].size.cmp(&graph.nodes[a].size).then(a.cmp(&b)));
    let mut covered = vec![false; graph.nodes.len()];
    let mut out = Vec::new();
    for seed in order {
        if out.len() == k {
            break;
        }
        if covered[seed] {
            continue;
        }
        let mut nodes = vec![seed];
        nodes.extend(adj[seed].iter().copied());
        nodes.sort_unstable();
        nodes.dedup();
        for &n in &nodes {
            covered[n] = true;
        }
        let point_ids = union_points(graph, &nodes);
        out.push(Candidate {
            rank: out.len() + 1,
            star_median: star_median(graph, &point_ids),
            node_ids: nodes,
            point_ids,
        });
    }
    out
}

pub fn popularity_groups(
    graph: &NerveGraph,
    matrix: &FeatureMatrix,
    channels: &[String],
    registry: &ChannelRegistry,
    thresholds: &Thresholds,
) -> Result<PopularityReport> {
    thresholds.validate()?;
    let dimensions = dimensions_of(channels, registry)?;
    let comps = rank_components(graph);
    if comps.is_empty() {
        return Err(Error::arg("popularity grouping needs at least one component"));
    }
    let n_components = comps.len();
    let all_points = comps.iter().map(|c| c.total_points).sum::<usize>();
    let fallback = comps[0].total_points as f64 > DOMINANT_COMPONENT_SHARE * all_points as f64;

    let mut candidates: Vec<Candidate> = if fallback {
        node_neighborhoods(graph, POPULARITY_CANDIDATES)
    } else {
        comps
            .into_iter()
            .take(POPULARITY_CANDIDATES)
            .map(|c| Candidate {
                rank: c.rank,
                node_ids: c.node_ids,
                point_ids: c.point_ids,
                star_median: c.star_median,
            })
            .collect()
    };
    let warning = if candidates.len() < 2 {
        Some(format!("only {} group found; no non-popular comparison", candidates.len()))
    } else if n_components < 2 {
        Some("a single nerve component; groups are node neighborhoods within it".to_owned())
    } else {
        None
    };

    // stable sort keeps rank order among equal medians
    candidates.sort_by(|a, b| b.star_median.total_cmp(&a.star_median));
    let groups = candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(PopularityGroup {
                label: if i == 0 { "Popular".to_owned() } else { format!("NonPopular{i}") },
                rank: c.rank,
                total_points: c.point_ids.len(),
                star_median: c.star_median,
                dominance: dominant_features(&c.point_ids, matrix, channels, thresholds)?,
                node_ids: c.node_ids,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PopularityReport {
        channels: channels.to_vec(),
        dimensions,
        thresholds: *thresholds,
        groups,
        fallback,
        warning,
    })
}

impl PopularityReport {
    pub fn group(&self, label: &str) -> Option<&PopularityGroup> {
        self.groups.iter().find(|g| g.label == label)
    }

    pub fn to_text(&self) -> String {
        render_popularity_table(&[(String::from("Level"), self)])
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["group", "rank", "nodes", "points", "star_median"];
        header.extend(self.channels.iter().map(String::as_str));
        wtr.write_record(&header).expect("in-memory CSV write");
        for g in &self.groups {
            let mut rec = vec![
                g.label.clone(),
                g.rank.to_string(),
                g.node_ids.len().to_string(),
                g.total_points.to_string(),
                format!("{}", g.star_median),
            ];
            rec.extend(g.dominance.iter().map(|d| d.level.symbol().to_owned()));
            wtr.write_record(&rec).expect("in-memory CSV write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory CSV flush")).expect("UTF-8")
    }
}

/// Cross-ecosystem layout: one row per (group, channel), one column per
/// ecosystem report. Groups missing from an ecosystem render blank.
pub fn render_popularity_table(reports: &[(String, &PopularityReport)]) -> String {
    let Some((_, first)) = reports.first() else {
        return String::new();
    };
    let mut labels: Vec<String> = Vec::new();
    for (_, r) in reports {
        for g in &r.groups {
            if !labels.contains(&g.label) {
                labels.push(g.label.clone());
            }
        }
    }
    labels.sort_by_key(|l| if l == "Popular" { (0, l.clone()) } else { (1, l.clone()) });

    let ch_w = first.channels.iter().map(|c| c.chars().count()).max().unwrap_or(0).max(8);
    let lab_w = labels.iter().map(String::len).max().unwrap_or(0).max(16);
    let dim_w = 15;
    let col_w: Vec<usize> = reports.iter().map(|(n, _)| n.chars().count().max(2)).collect();

    let mut out = String::new();
    let warnings: Vec<String> = reports
        .iter()
        .flat_map(|(n, r)| {
            let mut w = Vec::new();
            if r.fallback {
                w.push(format!("{n}: groups are node neighborhoods (one component holds most points)"));
            }
            if let Some(msg) = &r.warning {
                w.push(format!("{n}: {msg}"));
            }
            w
        })
        .collect();
    let _ = writeln!(
        out,
        "Dominant channels per group (✓ mean >= {:.2}, ✓✓ mean >= {:.2}, − otherwise)",
        first.thresholds.dominant, first.thresholds.strongly_dominant
    );
    for w in &warnings {
        let _ = writeln!(out, "note: {w}");
    }
    out.push('\n');
    let mut header = vec![pad("Topology Cluster", lab_w), pad("Features", ch_w), pad("Dimensions", dim_w)];
    header.extend(reports.iter().zip(&col_w).map(|((n, _), &w)| pad(n, w)));
    let _ = writeln!(out, "{}", header.join(" | ").trim_end());
    let rule: usize = header.iter().map(|h| h.chars().count()).sum::<usize>() + 3 * (header.len() - 1);
    let _ = writeln!(out, "{}", "-".repeat(rule));
    for label in &labels {
        for (ci, ch) in first.channels.iter().enumerate() {
            let mut cells = vec![
                pad(if ci == 0 { label } else { "" }, lab_w),
                pad(ch, ch_w),
                pad(&first.dimensions[ci].to_string(), dim_w),
            ];
            for ((_, r), &w) in reports.iter().zip(&col_w) {
                let sym = r
                    .group(label)
                    .and_then(|g| g.dominance.iter().find(|d| &d.channel == ch))
                    .map_or("", |d| d.level.symbol());
                cells.push(pad(sym, w));
            }
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        }
        let _ = writeln!(out, "{}", "-".repeat(rule));
    }
    out
}
