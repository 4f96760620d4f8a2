use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::color::{lab_ramp, ABSENT_COLOR, PRESENT_COLOR};
use super::layout::{bin_grid_layout, force_directed_layout, Layout};
use super::xml_escape;
use crate::error::{Error, Result};
use crate::mapper::NerveGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    /// channel whose node means drive the fill; grey when unset
    pub color_channel: Option<String>,
    pub layout: Layout,
    pub seed: u64,
    pub layout_iterations: usize,
    /// radius of the largest node, in pixels
    pub max_radius: f64,
    /// bin-grid jitter as a fraction of the plot
    pub jitter: f64,
    pub title: Option<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 800.0,
            height: 800.0,
            color_channel: None,
            layout: Layout::ForceDirected,
            seed: 0,
            layout_iterations: 300,
            max_radius: 18.0,
            jitter: 0.015,
            title: None,
        }
    }
}

const MARGIN: f64 = 30.0;
const LEGEND_HEIGHT: f64 = 56.0;
const NEUTRAL: &str = "#b0b0b0";

/// Renders the nerve as SVG. Circle area is proportional to node size;
/// the fill follows the red (0) to blue (1) CIELAB ramp.
pub fn render_svg(graph: &NerveGraph, spec: &RenderSpec) -> Result<String> {
    if !(spec.width > 2.0 * MARGIN && spec.height > 2.0 * MARGIN + LEGEND_HEIGHT) {
        return Err(Error::arg(format!("canvas {}x{} is too small", spec.width, spec.height)));
    }
    if !(spec.max_radius > 0.0) {
        return Err(Error::arg("max radius must be positive"));
    }
    let values = match &spec.color_channel {
        Some(ch) => {
            let j = graph
                .channel_index(ch)
                .ok_or_else(|| Error::arg(format!("channel {ch:?} is not in the graph")))?;
            Some(graph.nodes.iter().map(|n| n.feature_means[j]).collect::<Vec<f64>>())
        }
        None => None,
    };
    let unit = match spec.layout {
        Layout::ForceDirected => force_directed_layout(graph, spec.seed, spec.layout_iterations),
        Layout::BinGrid => bin_grid_layout(graph, spec.seed, spec.jitter),
    };
    let plot_w = spec.width - 2.0 * MARGIN;
    let plot_h = spec.height - 2.0 * MARGIN - LEGEND_HEIGHT;
    let pos: Vec<(f64, f64)> = unit
        .iter()
        .map(|p| (MARGIN + p[0] * plot_w, MARGIN + (1.0 - p[1]) * plot_h))
        .collect();
    let max_size = graph.nodes.iter().map(|n| n.size).max().unwrap_or(1).max(1) as f64;
    let scale = spec.max_radius / max_size.sqrt();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = spec.width,
        h = spec.height
    );
    let meta = serde_json::json!({
        "color_ramp": "cielab",
        "absent_color": ABSENT_COLOR.hex(),
        "present_color": PRESENT_COLOR.hex(),
        "color_channel": spec.color_channel,
        "layout": spec.layout,
        "seed": spec.seed,
        "nodes": graph.nodes.len(),
        "edges": graph.edges.len(),
        "radius_per_sqrt_size": scale,
    });
    let _ = writeln!(out, "<metadata>{}</metadata>", xml_escape(&meta.to_string()));
    if let Some(t) = &spec.title {
        let _ = writeln!(out, "<title>{}</title>", xml_escape(t));
    }
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    out.push_str("<g id=\"edges\" stroke=\"#888888\" stroke-opacity=\"0.6\">\n");
    for e in &graph.edges {
        let ((x1, y1), (x2, y2)) = (pos[e.a], pos[e.b]);
        let width = 0.5 + (e.shared_count as f64).ln_1p() * 0.5;
        let _ = writeln!(
            out,
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke-width=\"{width:.2}\" data-a=\"{}\" data-b=\"{}\"/>",
            e.a, e.b
        );
    }
    out.push_str("</g>\n<g id=\"nodes\" stroke=\"#333333\" stroke-width=\"0.5\">\n");
    for (n, &(x, y)) in graph.nodes.iter().zip(&pos) {
        let r = scale * (n.size as f64).sqrt();
        let (fill, value) = match &values {
            Some(v) => (lab_ramp(v[n.id]).hex(), format!(" data-value=\"{}\"", v[n.id])),
            None => (NEUTRAL.to_owned(), String::new()),
        };
        let _ = writeln!(
            out,
            "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.4}\" fill=\"{fill}\" data-node=\"{}\" data-size=\"{}\"{value}><title>node {} size {} median stars {}</title></circle>",
            n.id, n.size, n.id, n.size, n.star_median
        );
    }
    out.push_str("</g>\n");
    legend(&mut out, spec, max_size);
    out.push_str("</svg>\n");
    Ok(out)
}

fn legend(out: &mut String, spec: &RenderSpec, max_size: f64) {
    let y = spec.height - MARGIN - LEGEND_HEIGHT + 16.0;
    let bar_w = (spec.width - 2.0 * MARGIN).min(240.0);
    out.push_str("<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n");
    if let Some(ch) = &spec.color_channel {
        out.push_str("  <defs><linearGradient id=\"ramp\">");
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let _ = write!(out, "<stop offset=\"{t}\" stop-color=\"{}\"/>", lab_ramp(t).hex());
        }
        out.push_str("</linearGradient></defs>\n");
        let _ = writeln!(
            out,
            "  <rect x=\"{MARGIN}\" y=\"{y}\" width=\"{bar_w}\" height=\"10\" fill=\"url(#ramp)\"/>"
        );
        let _ = writeln!(out, "  <text x=\"{MARGIN}\" y=\"{}\">0 absent</text>", y + 24.0);
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">1 present</text>",
            MARGIN + bar_w,
            y + 24.0
        );
        let _ = writeln!(out, "  <text x=\"{MARGIN}\" y=\"{}\">{}</text>", y - 4.0, xml_escape(ch));
    }
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">circle area ∝ node size (max {max_size})</text>",
        spec.width - MARGIN,
        y + 24.0
    );
    out.push_str("</g>\n");
}
