use std::fmt::Write as _;

use super::xml_escape;
use crate::mapper::NerveGraph;

/// GraphML document with node statistics as typed `data` keys. Channel
/// means use keys `c0`, `c1`, ... named after the channel.
pub fn to_graphml(graph: &NerveGraph) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    let keys = [
        ("bin", "node", "bin_id", "int"),
        ("size", "node", "size", "int"),
        ("stars", "node", "star_median", "double"),
        ("cx", "node", "bin_center_x", "double"),
        ("cy", "node", "bin_center_y", "double"),
        ("members", "node", "members", "string"),
        ("shared", "edge", "shared_count", "int"),
    ];
    for (id, target, name, ty) in keys {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    for (j, ch) in graph.channels.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <key id=\"c{j}\" for=\"node\" attr.name=\"{}\" attr.type=\"double\"/>",
            xml_escape(ch)
        );
    }
    out.push_str("  <graph id=\"nerve\" edgedefault=\"undirected\">\n");
    for n in &graph.nodes {
        let _ = writeln!(out, "    <node id=\"n{}\">", n.id);
        let members: Vec<String> = n.members.iter().map(|&p| xml_escape(&graph.point_ids[p])).collect();
        let data = [
            ("bin", n.bin_id.to_string()),
            ("size", n.size.to_string()),
            ("stars", n.star_median.to_string()),
            ("cx", n.bin_center[0].to_string()),
            ("cy", n.bin_center[1].to_string()),
            ("members", members.join(" ")),
        ];
        for (k, v) in data {
            let _ = writeln!(out, "      <data key=\"{k}\">{v}</data>");
        }
        for (j, m) in n.feature_means.iter().enumerate() {
            let _ = writeln!(out, "      <data key=\"c{j}\">{m}</data>");
        }
        out.push_str("    </node>\n");
    }
    for (i, e) in graph.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{i}\" source=\"n{}\" target=\"n{}\">\n      <data key=\"shared\">{}</data>\n    </edge>",
            e.a, e.b, e.shared_count
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
