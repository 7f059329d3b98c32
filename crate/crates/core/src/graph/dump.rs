use std::fmt::Write;

use super::AddressGraph;

/// Plain-text debug dump: a node table followed by one line per edge in the
/// form `node_key kind | node_key kind | direction | value`.
pub fn dump_graph(graph: &AddressGraph) -> String {
    let mut s = String::new();
    writeln!(s, "# window {}", graph.window_index).unwrap();
    writeln!(s, "# nodes").unwrap();
    for (i, n) in graph.nodes.iter().enumerate() {
        let target = if n.is_target { " target" } else { "" };
        writeln!(s, "{i} {} {}{target}", n.key, n.kind).unwrap();
    }
    writeln!(s, "# edges").unwrap();
    for e in &graph.edges {
        let a = &graph.nodes[e.address_node];
        let t = &graph.nodes[e.tx_node];
        writeln!(
            s,
            "{} {} | {} {} | {} | {}",
            a.key, a.kind, t.key, t.kind, e.direction, e.value
        )
        .unwrap();
    }
    s
}
