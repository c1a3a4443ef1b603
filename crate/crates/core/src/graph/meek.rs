use super::MixedGraph;
use crate::error::{Error, Result};

/// Dense edge marks used while propagating orientations.
pub(crate) struct Dense {
    n: usize,
    arrow: Vec<bool>,
    undir: Vec<bool>,
}

impl Dense {
    pub(crate) fn from_graph(g: &MixedGraph) -> Self {
        let n = g.n();
        let mut d = Dense {
            n,
            arrow: vec![false; n * n],
            undir: vec![false; n * n],
        };
        for (a, b) in g.directed_edges() {
            d.arrow[a * n + b] = true;
        }
        for (a, b) in g.undirected_edges() {
            d.undir[a * n + b] = true;
            d.undir[b * n + a] = true;
        }
        d
    }

    #[inline]
    pub(crate) fn arrow(&self, a: usize, b: usize) -> bool {
        self.arrow[a * self.n + b]
    }

    #[inline]
    pub(crate) fn undir(&self, a: usize, b: usize) -> bool {
        self.undir[a * self.n + b]
    }

    #[inline]
    pub(crate) fn adj(&self, a: usize, b: usize) -> bool {
        self.arrow(a, b) || self.arrow(b, a) || self.undir(a, b)
    }

    pub(crate) fn orient(&mut self, a: usize, b: usize) {
        let n = self.n;
        self.undir[a * n + b] = false;
        self.undir[b * n + a] = false;
        self.arrow[a * n + b] = true;
    }

    /// Whether one of R1-R4 forces the undirected edge `a - b` into `a -> b`.
    pub(crate) fn forces(&self, a: usize, b: usize) -> bool {
        let n = self.n;
        // R1: c -> a - b, c and b nonadjacent.
        for c in 0..n {
            if c != b && self.arrow(c, a) && !self.adj(c, b) {
                return true;
            }
        }
        // R2: a -> c -> b.
        for c in 0..n {
            if self.arrow(a, c) && self.arrow(c, b) {
                return true;
            }
        }
        // R3: a - k -> b and a - l -> b with k, l nonadjacent.
        let ks: Vec<usize> = (0..n)
            .filter(|&k| k != b && self.undir(a, k) && self.arrow(k, b))
            .collect();
        for (i, &k) in ks.iter().enumerate() {
            for &l in &ks[i + 1..] {
                if !self.adj(k, l) {
                    return true;
                }
            }
        }
        // R4: a - k, k -> l -> b, k and b nonadjacent, a adjacent to l.
        for k in 0..n {
            if k == b || !self.undir(a, k) || self.adj(k, b) {
                continue;
            }
            for l in 0..n {
                if l != a && self.arrow(k, l) && self.arrow(l, b) && self.adj(a, l) {
                    return true;
                }
            }
        }
        false
    }
}

/// Closes `g` under Meek's rules R1-R4. Existing edges are kept; undirected
/// edges are only ever promoted to directed ones.
pub fn apply_meek_rules(g: &MixedGraph) -> Result<MixedGraph> {
    apply_meek_rules_in_order(g, &mut |_| {})
}

/// As [`apply_meek_rules`], but `permute` reorders the candidate edge list
/// before every pass. The fixpoint does not depend on the order for graphs
/// that admit a consistent DAG extension.
pub fn apply_meek_rules_in_order(
    g: &MixedGraph,
    permute: &mut dyn FnMut(&mut [(usize, usize)]),
) -> Result<MixedGraph> {
    if !g.is_directed_acyclic() {
        return Err(Error::Cyclic);
    }
    let mut dense = Dense::from_graph(g);
    let mut out = g.clone();
    loop {
        let mut candidates: Vec<(usize, usize)> = out
            .undirected_edges()
            .flat_map(|(a, b)| [(a, b), (b, a)])
            .collect();
        permute(&mut candidates);
        let mut changed = false;
        for (a, b) in candidates {
            if dense.undir(a, b) && dense.forces(a, b) {
                dense.orient(a, b);
                out.orient(a, b);
                changed = true;
            }
        }
        if !changed {
            return Ok(out);
        }
    }
}
