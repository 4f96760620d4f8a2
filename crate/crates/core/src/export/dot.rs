use std::fmt::Write as _;

use super::color::lab_ramp;
use crate::error::{Error, Result};
use crate::mapper::NerveGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz DOT text. With `color_channel`, nodes are filled along the
/// red-to-blue ramp by that channel's mean.
pub fn to_dot(graph: &NerveGraph, color_channel: Option<&str>) -> Result<String> {
    let colors = match color_channel {
        Some(ch) => {
            let j = graph
                .channel_index(ch)
                .ok_or_else(|| Error::arg(format!("channel {ch:?} is not in the graph")))?;
            Some(graph.nodes.iter().map(|n| lab_ramp(n.feature_means[j]).hex()).collect::<Vec<_>>())
        }
        None => None,
    };
    let max_size = graph.nodes.iter().map(|n| n.size).max().unwrap_or(1).max(1) as f64;
    let mut out = String::from("graph nerve {\n  node [shape=circle, style=filled, fixedsize=true];\n");
    if let Some(ch) = color_channel {
        let _ = writeln!(out, "  label={};", quote(&format!("color: {ch}")));
    }
    for n in &graph.nodes {
        let width = 0.2 + 0.8 * (n.size as f64 / max_size).sqrt();
        let fill = colors.as_ref().map_or_else(|| "#d0d0d0".to_owned(), |c| c[n.id].clone());
        let _ = writeln!(
            out,
            "  n{} [label={}, width={width:.3}, fillcolor={}];",
            n.id,
            quote(&n.size.to_string()),
            quote(&fill)
        );
    }
    for e in &graph.edges {
        let _ = writeln!(out, "  n{} -- n{} [weight={}];", e.a, e.b, e.shared_count);
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::test_graph::sample;

    #[test]
    fn structure_and_colors() {
        let dot = to_dot(&sample(), Some("Wiki")).unwrap();
        assert!(dot.starts_with("graph nerve {"));
        assert_eq!(dot.matches(" -- ").count(), 2);
        assert!(dot.contains("n0 [label=\"4\", width=1.000, fillcolor=\"#ff0000\"]"));
        assert!(dot.contains("fillcolor=\"#0000ff\""));
        assert!(to_dot(&sample(), Some("Fork")).is_err());
        assert!(to_dot(&sample(), None).unwrap().contains("#d0d0d0"));
    }
}
