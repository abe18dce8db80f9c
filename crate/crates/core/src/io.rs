//! Text formats: graph files and event scripts.
//!
//! A graph file starts with `n m` and lists `m` edges as `u v w`, or `u v`
//! when unweighted. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::engine::{Event, ScheduledEvent};
use crate::error::{GraphError, ParseError};
use crate::graph::{Edge, NodeId};
use crate::Graph;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, ParseError> {
    tok.parse().map_err(|_| ParseError::Syntax { line, msg: format!("invalid {what} `{tok}`") })
}

pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(ParseError::Syntax { line: 1, msg: "missing `n m` header".into() })?;
    if header.len() != 2 {
        return Err(ParseError::Syntax { line: hline, msg: "header must be `n m`".into() });
    }
    let n: usize = num(header[0], hline, "node count")?;
    let m: usize = num(header[1], hline, "edge count")?;
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(m);
    let mut weighted = None;
    for (line, toks) in lines {
        if toks.len() != 2 && toks.len() != 3 {
            return Err(ParseError::Syntax { line, msg: "edge line must be `u v [w]`".into() });
        }
        let has_w = toks.len() == 3;
        if *weighted.get_or_insert(has_w) != has_w {
            return Err(ParseError::Syntax { line, msg: "mixed weighted and unweighted edges".into() });
        }
        let u: NodeId = num(toks[0], line, "node")?;
        let v: NodeId = num(toks[1], line, "node")?;
        let w: u64 = if has_w { num(toks[2], line, "weight")? } else { 1 };
        for x in [u, v] {
            if x >= n {
                return Err(ParseError::Invalid { line, source: GraphError::NodeOutOfRange { node: x, n } });
            }
        }
        if u == v {
            return Err(ParseError::Invalid { line, source: GraphError::SelfLoop(u) });
        }
        let e = Edge::new(u, v);
        if !seen.insert(e) {
            return Err(ParseError::Invalid { line, source: GraphError::DuplicateEdge(e) });
        }
        if w == 0 {
            return Err(ParseError::Invalid { line, source: GraphError::NonPositiveWeight(e) });
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(ParseError::Syntax { line: hline, msg: format!("header announces {m} edges, found {}", edges.len()) });
    }
    if weighted == Some(false) {
        let plain: Vec<(NodeId, NodeId)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        Ok(Graph::unweighted(n, &plain)?)
    } else {
        Ok(Graph::new(n, &edges)?)
    }
}

pub fn format_graph(net: &Graph) -> String {
    let mut out = format!("{} {}\n", net.n(), net.m());
    for (e, w) in net.edges() {
        if net.is_weighted() {
            let _ = writeln!(out, "{} {} {}", e.lo(), e.hi(), w);
        } else {
            let _ = writeln!(out, "{} {}", e.lo(), e.hi());
        }
    }
    out
}

/// Weight script: lines `round u v new_w`.
pub fn parse_weight_events(text: &str) -> Result<Vec<ScheduledEvent>, ParseError> {
    content_lines(text)
        .map(|(line, toks)| {
            if toks.len() != 4 {
                return Err(ParseError::Syntax { line, msg: "expected `round u v new_w`".into() });
            }
            let round = num(toks[0], line, "round")?;
            let u: NodeId = num(toks[1], line, "node")?;
            let v: NodeId = num(toks[2], line, "node")?;
            let weight: u64 = num(toks[3], line, "weight")?;
            if weight == 0 {
                return Err(ParseError::Invalid { line, source: GraphError::NonPositiveWeight(Edge::new(u, v)) });
            }
            Ok(ScheduledEvent { round, event: Event::Weight { edge: Edge::new(u, v), weight } })
        })
        .collect()
}

/// Membership script: lines `round node join|leave`.
pub fn parse_member_events(text: &str) -> Result<Vec<ScheduledEvent>, ParseError> {
    content_lines(text)
        .map(|(line, toks)| {
            if toks.len() != 3 {
                return Err(ParseError::Syntax { line, msg: "expected `round node join|leave`".into() });
            }
            let round = num(toks[0], line, "round")?;
            let node = num(toks[1], line, "node")?;
            let join = match toks[2] {
                "join" => true,
                "leave" => false,
                other => return Err(ParseError::Syntax { line, msg: format!("expected join or leave, got `{other}`") }),
            };
            Ok(ScheduledEvent { round, event: Event::Member { node, join } })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_path() {
        let g = parse_graph("3 2\n0 1 4\n1 2 7").unwrap();
        assert_eq!(g.weight(0, 1), Some(4));
        assert_eq!(g.weight(1, 2), Some(7));
        assert!(g.is_weighted());
    }

    #[test]
    fn comments_and_unweighted() {
        let g = parse_graph("# triangle\n3 3\n0 1\n1 2 # last\n2 0\n").unwrap();
        assert!(!g.is_weighted());
        assert_eq!(g.m(), 3);
        assert_eq!(parse_graph(&format_graph(&g)).unwrap().edge_set(), g.edge_set());
    }

    #[test]
    fn duplicate_names_line() {
        let err = parse_graph("3 3\n0 1 1\n1 2 1\n1 0 5\n").unwrap_err();
        assert_eq!(err, ParseError::Invalid { line: 4, source: GraphError::DuplicateEdge(Edge::new(0, 1)) });
        assert!(err.to_string().starts_with("line 4"));
    }

    #[test]
    fn disconnected_rejected() {
        assert_eq!(parse_graph("4 2\n0 1 1\n2 3 1\n").unwrap_err(), ParseError::Graph(GraphError::Disconnected));
    }

    #[test]
    fn scripts() {
        let w = parse_weight_events("3 0 1 9\n").unwrap();
        assert_eq!(w[0], ScheduledEvent { round: 3, event: Event::Weight { edge: Edge::new(0, 1), weight: 9 } });
        let m = parse_member_events("0 4 join\n5 4 leave\n").unwrap();
        assert_eq!(m[1].event, Event::Member { node: 4, join: false });
        assert!(parse_member_events("1 2 stay").is_err());
    }
}
