use std::collections::BTreeSet;

use super::meek::apply_meek_rules;
use super::{GraphKind, MixedGraph};
use crate::error::{Error, Result};

/// Member counts above this are logged as a warning by [`enumerate_mec`].
pub const MEC_WARN_SIZE: usize = 1 << 20;

/// Essential graph of a DAG: its skeleton, with the arrows of unshielded
/// colliders kept and then propagated by Meek's rules.
pub fn cpdag_of(dag: &MixedGraph) -> Result<MixedGraph> {
    if dag.n_undirected() > 0 {
        return Err(Error::InvalidGraph(
            "expected a DAG, found undirected edges".into(),
        ));
    }
    if !dag.is_directed_acyclic() {
        return Err(Error::Cyclic);
    }
    let mut collider_arrows = BTreeSet::new();
    for (a, c, b) in dag.v_structures() {
        collider_arrows.insert((a, c));
        collider_arrows.insert((b, c));
    }
    let mut pattern = MixedGraph::new(dag.names().to_vec(), GraphKind::Pdag);
    for (a, b) in dag.directed_edges() {
        if collider_arrows.contains(&(a, b)) {
            pattern.add_directed(a, b)?;
        } else {
            pattern.add_undirected(a, b)?;
        }
    }
    Ok(apply_meek_rules(&pattern)?.with_kind(GraphKind::Cpdag))
}

/// Dor-Tarsi extension: a DAG with the same skeleton and unshielded
/// colliders that keeps every arrow of `pdag`, if one exists.
pub fn consistent_extension(pdag: &MixedGraph) -> Option<MixedGraph> {
    let n = pdag.n();
    let mut arrow = vec![vec![false; n]; n];
    let mut undir = vec![vec![false; n]; n];
    for (a, b) in pdag.directed_edges() {
        arrow[a][b] = true;
    }
    for (a, b) in pdag.undirected_edges() {
        undir[a][b] = true;
        undir[b][a] = true;
    }
    let adj = |arrow: &Vec<Vec<bool>>, undir: &Vec<Vec<bool>>, a: usize, b: usize| {
        arrow[a][b] || arrow[b][a] || undir[a][b]
    };
    let mut alive = vec![true; n];
    let mut out = pdag.clone().with_kind(GraphKind::Dag);
    for _ in 0..n {
        let sink = (0..n).find(|&x| {
            alive[x]
                && !(0..n).any(|w| alive[w] && arrow[x][w])
                && (0..n).filter(|&y| alive[y] && undir[x][y]).all(|y| {
                    (0..n).all(|z| {
                        z == y
                            || z == x
                            || !alive[z]
                            || !adj(&arrow, &undir, x, z)
                            || adj(&arrow, &undir, y, z)
                    })
                })
        })?;
        for y in 0..n {
            if alive[y] && undir[sink][y] {
                out.orient(y, sink);
            }
        }
        alive[sink] = false;
        for w in 0..n {
            arrow[sink][w] = false;
            arrow[w][sink] = false;
            undir[sink][w] = false;
            undir[w][sink] = false;
        }
    }
    debug_assert!(out.is_dag());
    Some(out)
}

/// Every DAG in the equivalence class of `cpdag`, ordered lexicographically
/// by the orientation vector of its undirected edges (bit 0 means
/// low index -> high index).
pub fn enumerate_mec(cpdag: &MixedGraph) -> Result<Vec<MixedGraph>> {
    let members = enumerate_mec_capped(cpdag, usize::MAX)?;
    if members.len() > MEC_WARN_SIZE {
        log::warn!("equivalence class has {} members", members.len());
    }
    Ok(members)
}

/// As [`enumerate_mec`], failing with [`Error::TooManyHypotheses`] once more
/// than `cap` members are found.
pub fn enumerate_mec_capped(cpdag: &MixedGraph, cap: usize) -> Result<Vec<MixedGraph>> {
    let check = cpdag.clone().with_kind(GraphKind::Cpdag);
    check.validate()?;
    let edges: Vec<(usize, usize)> = cpdag.undirected_edges().collect();
    let n = cpdag.n();
    let mut adj = vec![vec![false; n]; n];
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in cpdag.directed_edges() {
        parents[b].push(a);
        children[a].push(b);
    }
    for (a, b) in cpdag.directed_edges().chain(edges.iter().copied()) {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut search = MecSearch {
        base: cpdag,
        edges: &edges,
        adj,
        parents,
        children,
        chosen: Vec::with_capacity(edges.len()),
        out: Vec::new(),
        cap,
    };
    search.recurse()?;
    Ok(search.out)
}

struct MecSearch<'a> {
    base: &'a MixedGraph,
    edges: &'a [(usize, usize)],
    adj: Vec<Vec<bool>>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    chosen: Vec<(usize, usize)>,
    out: Vec<MixedGraph>,
    cap: usize,
}

impl MecSearch<'_> {
    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.adj.len()];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &w in &self.children[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    fn admissible(&self, tail: usize, head: usize) -> bool {
        !self.reaches(head, tail) && self.parents[head].iter().all(|&p| self.adj[p][tail])
    }

    fn recurse(&mut self) -> Result<()> {
        let depth = self.chosen.len();
        if depth == self.edges.len() {
            if self.out.len() >= self.cap {
                return Err(Error::TooManyHypotheses {
                    members: self.out.len() + 1,
                    cap: self.cap,
                });
            }
            let mut g = self.base.clone().with_kind(GraphKind::Dag);
            for &(t, h) in &self.chosen {
                g.orient(t, h);
            }
            self.out.push(g);
            return Ok(());
        }
        let (a, b) = self.edges[depth];
        for (tail, head) in [(a, b), (b, a)] {
            if self.admissible(tail, head) {
                self.parents[head].push(tail);
                self.children[tail].push(head);
                self.chosen.push((tail, head));
                let r = self.recurse();
                self.chosen.pop();
                self.children[tail].pop();
                self.parents[head].pop();
                r?;
            }
        }
        Ok(())
    }
}
