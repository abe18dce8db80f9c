use std::collections::BTreeSet;
use std::fmt::Write as _;

use stabilab_core::graph::Edge;
use stabilab_core::{Graph, NodeId};

/// Network in DOT: tree edges solid, the others dashed.
pub fn tree_dot(net: &Graph, tree: &BTreeSet<Edge>) -> String {
    let mut s = String::from("graph tree {\n");
    for u in net.nodes() {
        let _ = writeln!(s, "  {u};");
    }
    for (e, w) in net.edges() {
        let style = if tree.contains(&e) { "solid" } else { "dashed" };
        let _ = writeln!(s, "  {} -- {} [label={w}, style={style}];", e.lo(), e.hi());
    }
    s.push_str("}\n");
    s
}

/// Tree edges of a parent map; pointers along non-edges are ignored.
pub fn parent_tree(net: &Graph, parents: &[Option<NodeId>]) -> BTreeSet<Edge> {
    parents
        .iter()
        .enumerate()
        .filter_map(|(u, p)| p.filter(|&p| net.is_edge(u, p)).map(|p| Edge::new(u, p)))
        .collect()
}
