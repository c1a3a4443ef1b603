//! Mixed graphs: one representation for DAGs, PDAGs, CPDAGs and MPDAGs.
//!
//! Vertices are dense indices `0..n` with display names. Directed edges are
//! ordered pairs `(tail, head)`; undirected edges are stored once as
//! `(low, high)`.

mod chordal;
mod io;
mod mec;
mod meek;
mod pco;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chordal::{chordalize, is_chordal, max_clique_size, mcs_order, peo, peo_coloring};
pub use io::{parse_edge_list, write_edge_list};
pub use mec::{consistent_extension, cpdag_of, enumerate_mec, enumerate_mec_capped, MEC_WARN_SIZE};
pub use meek::{apply_meek_rules, apply_meek_rules_in_order};
pub use pco::{pco, BucketOrdering};

/// What a [`MixedGraph`] is claimed to be; checked by [`MixedGraph::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Dag,
    Pdag,
    Cpdag,
    Mpdag,
}

/// Orientation of a single edge relative to an ordered pair of endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeMark {
    Forward,
    Backward,
    Undirected,
}

#[derive(Clone, Debug, Eq)]
pub struct MixedGraph {
    names: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
    kind: GraphKind,
}

impl PartialEq for MixedGraph {
    /// Structural equality; the kind tag is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.directed == other.directed
            && self.undirected == other.undirected
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MixedGraph {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, kind: GraphKind) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
            kind,
        }
    }

    /// Graph on `n` vertices named `V1..Vn`.
    pub fn with_nodes(n: usize, kind: GraphKind) -> Self {
        Self::new((1..=n).map(|i| format!("V{i}")), kind)
    }

    pub fn from_edges(
        names: Vec<String>,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
        kind: GraphKind,
    ) -> Result<Self> {
        let mut g = Self::new(names, kind);
        for (a, b) in directed {
            g.add_directed(a, b)?;
        }
        for (a, b) in undirected {
            g.add_undirected(a, b)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn set_kind(&mut self, kind: GraphKind) {
        self.kind = kind;
    }

    pub fn with_kind(mut self, kind: GraphKind) -> Self {
        self.kind = kind;
        self
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        let n = self.n();
        if a >= n {
            return Err(Error::VertexOutOfRange(a));
        }
        if b >= n {
            return Err(Error::VertexOutOfRange(b));
        }
        if a == b {
            return Err(Error::InvalidGraph(format!(
                "self-loop at {}",
                self.names[a]
            )));
        }
        if self.is_adjacent(a, b) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge between {} and {}",
                self.names[a], self.names[b]
            )));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, tail: usize, head: usize) -> Result<()> {
        self.check_pair(tail, head)?;
        self.directed.insert((tail, head));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.undirected.insert(ordered(a, b));
        Ok(())
    }

    /// Turns the undirected edge `a - b` into `a -> b`. Returns false when no
    /// such undirected edge exists.
    pub fn orient(&mut self, tail: usize, head: usize) -> bool {
        if self.undirected.remove(&ordered(tail, head)) {
            self.directed.insert((tail, head));
            true
        } else {
            false
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        self.undirected.remove(&ordered(a, b))
            || self.directed.remove(&(a, b))
            || self.directed.remove(&(b, a))
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    pub fn n_directed(&self) -> usize {
        self.directed.len()
    }

    pub fn n_undirected(&self) -> usize {
        self.undirected.len()
    }

    pub fn n_edges(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn has_arrow(&self, tail: usize, head: usize) -> bool {
        self.directed.contains(&(tail, head))
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected.contains(&ordered(a, b))
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.has_arrow(a, b) || self.has_arrow(b, a) || self.has_undirected(a, b)
    }

    /// Mark of the edge between `a` and `b`, seen from `a`.
    pub fn edge_mark(&self, a: usize, b: usize) -> Option<EdgeMark> {
        if self.has_arrow(a, b) {
            Some(EdgeMark::Forward)
        } else if self.has_arrow(b, a) {
            Some(EdgeMark::Backward)
        } else if self.has_undirected(a, b) {
            Some(EdgeMark::Undirected)
        } else {
            None
        }
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.directed
            .iter()
            .filter(|e| e.1 == v)
            .map(|e| e.0)
            .collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.directed
            .iter()
            .filter(|e| e.0 == v)
            .map(|e| e.1)
            .collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        self.undirected
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn adjacent(&self, v: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&w| w != v && self.is_adjacent(v, w))
            .collect()
    }

    /// Undirected graph with the same adjacencies.
    pub fn skeleton(&self) -> MixedGraph {
        let mut g = MixedGraph::new(self.names.clone(), GraphKind::Pdag);
        for &(a, b) in &self.directed {
            g.undirected.insert(ordered(a, b));
        }
        g.undirected.extend(self.undirected.iter().copied());
        g
    }

    /// Topological order of the directed part, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.directed {
            indeg[b] += 1;
            out[a].push(b);
        }
        // Smallest ready vertex first, for a deterministic order.
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_directed_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn is_dag(&self) -> bool {
        self.undirected.is_empty() && self.is_directed_acyclic()
    }

    /// Structural check against the kind tag. DAGs must be fully directed and
    /// acyclic; every other kind must have an acyclic directed part. CPDAGs
    /// and MPDAGs additionally need chordal undirected components.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.directed {
            if self.undirected.contains(&ordered(a, b)) || self.directed.contains(&(b, a)) {
                return Err(Error::InvalidGraph(format!(
                    "pair {}-{} appears twice",
                    self.names[a], self.names[b]
                )));
            }
        }
        if !self.is_directed_acyclic() {
            return Err(Error::Cyclic);
        }
        match self.kind {
            GraphKind::Dag if !self.undirected.is_empty() => {
                Err(Error::InvalidGraph("DAG has undirected edges".into()))
            }
            GraphKind::Cpdag | GraphKind::Mpdag => {
                let mut und = MixedGraph::new(self.names.clone(), GraphKind::Pdag);
                und.undirected = self.undirected.clone();
                if is_chordal(&und) {
                    Ok(())
                } else {
                    Err(Error::InvalidGraph("undirected part is not chordal".into()))
                }
            }
            _ => Ok(()),
        }
    }

    /// Ancestors of `targets` (inclusive) along directed edges, restricted to
    /// vertices where `allowed` is true.
    pub fn ancestors_within(&self, targets: &[usize], allowed: &[bool]) -> Vec<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &y in targets {
            if allowed[y] && !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
        let parents: Vec<Vec<usize>> = (0..n).map(|v| self.parents(v)).collect();
        while let Some(v) = queue.pop_front() {
            for &p in &parents[v] {
                if allowed[p] && !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        (0..n).filter(|&v| seen[v]).collect()
    }

    pub fn ancestors(&self, targets: &[usize]) -> Vec<usize> {
        self.ancestors_within(targets, &vec![true; self.n()])
    }

    /// Edges with exactly one endpoint in `set`, as `(inside, outside)` pairs
    /// sorted lexicographically.
    pub fn cut_edges(&self, set: &[usize]) -> Vec<(usize, usize)> {
        let mut inside = vec![false; self.n()];
        for &v in set {
            inside[v] = true;
        }
        let mut out = Vec::new();
        for &u in set {
            for w in 0..self.n() {
                if !inside[w] && self.is_adjacent(u, w) {
                    out.push((u, w));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Connected components of the undirected part (chain components),
    /// ordered by their smallest vertex.
    pub fn chain_components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                for w in self.undirected_neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    /// Unshielded colliders `a -> c <- b` with `a < b` nonadjacent, as `(a, c, b)`.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for c in 0..self.n() {
            let pa = self.parents(c);
            for (i, &a) in pa.iter().enumerate() {
                for &b in &pa[i + 1..] {
                    if !self.is_adjacent(a, b) {
                        out.insert((a.min(b), c, a.max(b)));
                    }
                }
            }
        }
        out
    }

    pub fn same_vertices(&self, other: &MixedGraph) -> bool {
        self.names == other.names
    }

    /// Renders a set of vertex indices as names.
    pub fn set_names(&self, set: &[usize]) -> Vec<String> {
        set.iter().map(|&v| self.names[v].clone()).collect()
    }
}

impl fmt::Display for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_edge_list(self))
    }
}

/// Structural Hamming distance: the number of vertex pairs whose edge state
/// (absent, either direction, undirected) differs. A reversal costs one edit.
pub fn shd(g1: &MixedGraph, g2: &MixedGraph) -> Result<usize> {
    if !g1.same_vertices(g2) {
        return Err(Error::VertexMismatch);
    }
    let n = g1.n();
    let mut d = 0;
    for a in 0..n {
        for b in a + 1..n {
            if g1.edge_mark(a, b) != g2.edge_mark(a, b) {
                d += 1;
            }
        }
    }
    Ok(d)
}
