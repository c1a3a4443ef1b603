//! Chordality via maximum cardinality search. Every routine here looks only
//! at adjacencies, so directed edges count as undirected ones.

use super::{GraphKind, MixedGraph};

fn adjacency(g: &MixedGraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in g.directed_edges().chain(g.undirected_edges()) {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

/// Maximum cardinality search visit order; ties go to the smallest index.
pub fn mcs_order(g: &MixedGraph) -> Vec<usize> {
    let n = g.n();
    let adj = adjacency(g);
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("an unvisited vertex remains");
        done[v] = true;
        order.push(v);
        for w in 0..n {
            if adj[v][w] && !done[w] {
                weight[w] += 1;
            }
        }
    }
    order
}

fn is_peo(adj: &[Vec<bool>], order: &[usize]) -> bool {
    let n = order.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().enumerate().all(|(i, &v)| {
        let later: Vec<usize> = (0..n).filter(|&w| adj[v][w] && pos[w] > i).collect();
        later
            .iter()
            .enumerate()
            .all(|(j, &a)| later[j + 1..].iter().all(|&b| adj[a][b]))
    })
}

/// A perfect elimination ordering (each vertex's later neighbours form a
/// clique), or `None` when the graph is not chordal.
pub fn peo(g: &MixedGraph) -> Option<Vec<usize>> {
    let mut order = mcs_order(g);
    order.reverse();
    is_peo(&adjacency(g), &order).then_some(order)
}

pub fn is_chordal(g: &MixedGraph) -> bool {
    peo(g).is_some()
}

/// Eliminates vertices in `order`, connecting the remaining neighbours of
/// each eliminated vertex. The result is an undirected chordal supergraph of
/// the skeleton.
pub fn chordalize(g: &MixedGraph, order: &[usize]) -> MixedGraph {
    let n = g.n();
    let mut adj = adjacency(g);
    let mut eliminated = vec![false; n];
    for &v in order {
        let nbrs: Vec<usize> = (0..n).filter(|&w| adj[v][w] && !eliminated[w]).collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        eliminated[v] = true;
    }
    let mut out = MixedGraph::new(g.names().to_vec(), GraphKind::Pdag);
    for a in 0..n {
        for b in a + 1..n {
            if adj[a][b] {
                out.add_undirected(a, b).expect("fresh pair");
            }
        }
    }
    out
}

/// Greedy colouring along the reverse of a perfect elimination ordering.
/// Uses exactly as many colours as the largest clique. `None` if the graph
/// is not chordal.
pub fn peo_coloring(g: &MixedGraph) -> Option<Vec<usize>> {
    let order = peo(g)?;
    let adj = adjacency(g);
    let n = g.n();
    let mut color = vec![usize::MAX; n];
    for &v in order.iter().rev() {
        let used: Vec<usize> = (0..n)
            .filter(|&w| adj[v][w] && color[w] != usize::MAX)
            .map(|w| color[w])
            .collect();
        color[v] = (0..).find(|c| !used.contains(c)).expect("unbounded range");
    }
    Some(color)
}

/// Largest clique of a chordal graph, read off a perfect elimination ordering.
pub fn max_clique_size(g: &MixedGraph) -> Option<usize> {
    let order = peo(g)?;
    let adj = adjacency(g);
    let n = g.n();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    Some(
        order
            .iter()
            .enumerate()
            .map(|(i, &v)| 1 + (0..n).filter(|&w| adj[v][w] && pos[w] > i).count())
            .max()
            .unwrap_or(0),
    )
}
