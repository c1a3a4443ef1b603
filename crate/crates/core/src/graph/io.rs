//! Edge-list text format: one item per line, `a -> b`, `a -- b`, or a lone
//! vertex name. `#` starts a comment. Vertices are numbered in order of first
//! appearance.

use std::collections::HashMap;

use super::{GraphKind, MixedGraph};
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str, kind: GraphKind) -> Result<MixedGraph> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, bool, usize)> = Vec::new();
    let mut intern = |name: &str| -> usize {
        if let Some(&i) = index.get(name) {
            return i;
        }
        index.insert(name.to_string(), names.len());
        names.push(name.to_string());
        names.len() - 1
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [v] => {
                intern(v);
            }
            [a, op, b] if *op == "->" || *op == "--" => {
                let (ia, ib) = (intern(a), intern(b));
                edges.push((ia, ib, *op == "->", lineno + 1));
            }
            _ => {
                return Err(Error::GraphSyntax {
                    line: lineno + 1,
                    msg: format!("expected `a -> b`, `a -- b` or a vertex name, got `{line}`"),
                })
            }
        }
    }
    let mut g = MixedGraph::new(names, kind);
    for (a, b, directed, line) in edges {
        let r = if directed {
            g.add_directed(a, b)
        } else {
            g.add_undirected(a, b)
        };
        r.map_err(|e| Error::GraphSyntax {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(g)
}

/// Canonical text form: every vertex on its own line, then directed edges,
/// then undirected edges, each in index order.
pub fn write_edge_list(g: &MixedGraph) -> String {
    let mut out = String::new();
    for name in g.names() {
        out.push_str(name);
        out.push('\n');
    }
    for (a, b) in g.directed_edges() {
        out.push_str(&format!("{} -> {}\n", g.name(a), g.name(b)));
    }
    for (a, b) in g.undirected_edges() {
        out.push_str(&format!("{} -- {}\n", g.name(a), g.name(b)));
    }
    out
}
