//! Intervention target families that cut every undirected edge of a CPDAG.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{peo_coloring, GraphKind, MixedGraph};

/// Ordered, deduplicated list of nonempty vertex sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TargetFamily {
    pub sets: Vec<Vec<usize>>,
    pub bound_k: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    sets: Vec<Vec<String>>,
}

impl TargetFamily {
    /// Sorts each set, drops empty sets and duplicates, keeping first
    /// occurrences in order.
    pub fn new(sets: Vec<Vec<usize>>, bound_k: Option<usize>) -> Result<Self> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || out.contains(&s) {
                continue;
            }
            if let Some(k) = bound_k {
                if s.len() > k {
                    return Err(Error::InvalidArgument(format!(
                        "target set of size {} exceeds the bound {k}",
                        s.len()
                    )));
                }
            }
            out.push(s);
        }
        Ok(Self { sets: out, bound_k })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn to_json(&self, g: &MixedGraph) -> String {
        let j = FamilyJson {
            sets: self.sets.iter().map(|s| g.set_names(s)).collect(),
        };
        serde_json::to_string(&j).expect("plain strings serialize")
    }

    pub fn from_json(text: &str, g: &MixedGraph) -> Result<Self> {
        let j: FamilyJson = serde_json::from_str(text)?;
        let sets = j
            .sets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|name| g.index_of(name))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sets, None)
    }
}

fn ceil_log(n: usize, a: usize) -> usize {
    let (mut len, mut p) = (0, 1usize);
    while p < n {
        p = p.saturating_mul(a);
        len += 1;
    }
    len
}

/// Distinct labels of length ⌈log_a n⌉ over the letters `0..=a`, with every
/// letter used at most ⌈n/a⌉ times in each position.
pub fn label_elements(n: usize, a: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 || a < 2 {
        return Err(Error::InvalidArgument(format!(
            "labeling needs n >= 2 and a >= 2, got n = {n}, a = {a}"
        )));
    }
    let len = ceil_log(n, a);
    let mut labels = vec![vec![0; len]; n];
    let mut block = 1usize;
    for d in 0..len {
        let period = block * a;
        let (pd, rd) = (n / period, n % period);
        let pd1 = n / block;
        let mut seq: Vec<usize> = (0..pd * period).map(|j| (j / block) % a).collect();
        let run = rd.div_ceil(a);
        let mut j = 0;
        while seq.len() < n {
            seq.push((j / run) % a);
            j += 1;
        }
        for (i, x) in seq.into_iter().enumerate() {
            labels[i][d] = if i + 1 > block * pd1 { x + 1 } else { x };
        }
        block = period;
    }
    Ok(labels)
}

fn sets_from_labels(labels: &[Vec<usize>], a: usize) -> Vec<Vec<usize>> {
    let len = labels.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for pos in 0..len {
        for b in 1..=a {
            let s: Vec<usize> = (0..labels.len()).filter(|&j| labels[j][pos] == b).collect();
            if !s.is_empty() && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// Family over `0..n` separating every pair, with sets of size at most `k`.
///
/// Labels use the alphabet parameter a = ⌈n/k⌉, raised to 2 when k >= n so
/// that the labeling stays defined. This keeps the size bound
/// a·⌈log_a n⌉.
pub fn nk_separating_system(n: usize, k: usize) -> Result<TargetFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "a separating system needs n >= 2".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidArgument(
            "set size bound must be positive".into(),
        ));
    }
    let a = n.div_ceil(k).max(2);
    let labels = label_elements(n, a)?;
    TargetFamily::new(sets_from_labels(&labels, a), Some(k))
}

/// Upper bound on the size of [`nk_separating_system`]`(n, k)`.
pub fn nk_size_bound(n: usize, k: usize) -> usize {
    let a = n.div_ceil(k).max(2);
    a * ceil_log(n, a)
}

/// Targets cutting every undirected edge of `cpdag`.
///
/// The undirected part is coloured greedily along a perfect elimination
/// ordering, which uses as many colours as its largest clique. Colours are
/// then separated by the labeling construction and each colour set is
/// expanded into its vertices. With a bound `k`, larger sets are split into
/// chunks of at most `k` vertices; each chunk still cuts the edges its
/// vertices cut.
pub fn graph_separating_system(cpdag: &MixedGraph, k: Option<usize>) -> Result<TargetFamily> {
    if k == Some(0) {
        return Err(Error::InvalidArgument(
            "set size bound must be positive".into(),
        ));
    }
    let n = cpdag.n();
    let mut und = MixedGraph::new(cpdag.names().to_vec(), GraphKind::Pdag);
    for (a, b) in cpdag.undirected_edges() {
        und.add_undirected(a, b)?;
    }
    let colors = peo_coloring(&und)
        .ok_or_else(|| Error::InvalidGraph("undirected part is not chordal".into()))?;
    let active: Vec<usize> = (0..n)
        .filter(|&v| !und.undirected_neighbors(v).is_empty())
        .collect();
    if active.is_empty() {
        return Ok(TargetFamily {
            sets: Vec::new(),
            bound_k: k,
        });
    }
    let chi = active.iter().map(|&v| colors[v]).max().unwrap_or(0) + 1;
    let color_sets = match k {
        None => {
            let labels = label_elements(chi, 2)?;
            sets_from_labels(&labels, 2)
        }
        Some(k) => nk_separating_system(chi, k)?.sets,
    };
    let mut sets = Vec::new();
    for cs in color_sets {
        let verts: Vec<usize> = active
            .iter()
            .copied()
            .filter(|v| cs.contains(&colors[*v]))
            .collect();
        match k {
            Some(k) => sets.extend(verts.chunks(k).map(<[usize]>::to_vec)),
            None => sets.push(verts),
        }
    }
    TargetFamily::new(sets, k)
}

/// First undirected edge of `g` not cut by any set of `family`, if any.
pub fn uncut_edge(g: &MixedGraph, family: &TargetFamily) -> Option<(usize, usize)> {
    g.undirected_edges()
        .find(|&(a, b)| !family.sets.iter().any(|s| s.contains(&a) != s.contains(&b)))
}

pub fn cuts_all_edges(g: &MixedGraph, family: &TargetFamily) -> bool {
    uncut_edge(g, family).is_none()
}
