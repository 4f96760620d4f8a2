//! Graph export: JSON, GraphML, DOT and SVG.

mod color;
mod dot;
mod graphml;
mod layout;
mod svg;

use std::path::Path;

pub use color::{lab_ramp, Rgb, ABSENT_COLOR, PRESENT_COLOR};
pub use dot::to_dot;
pub use graphml::to_graphml;
pub use layout::{bin_grid_layout, force_directed_layout, Layout};
pub use svg::{render_svg, RenderSpec};

use crate::error::{Error, Result};
use crate::mapper::NerveGraph;

pub fn to_json(graph: &NerveGraph) -> String {
    serde_json::to_string_pretty(graph).expect("graph serializes")
}

pub fn from_json(text: &str) -> Result<NerveGraph> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph JSON: {e}")))
}

pub fn save_json(graph: &NerveGraph, path: &Path) -> Result<()> {
    write_text(path, &to_json(graph))
}

pub fn load_json(path: &Path) -> Result<NerveGraph> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Escapes the five XML special characters.
pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
