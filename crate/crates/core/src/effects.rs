//! Causal effect identification in MPDAGs and enumeration of the candidate
//! interventional distributions for every orientation of a target's cut.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{apply_meek_rules, consistent_extension, pco, GraphKind, MixedGraph};
use crate::net::{increment, realizations, Factor, Intervention};

/// Orientation of every edge between `target` and the rest of the graph,
/// stored as `(tail, head)` pairs in the order of
/// [`MixedGraph::cut_edges`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CutConfig {
    pub target: Vec<usize>,
    pub arrows: Vec<(usize, usize)>,
}

impl CutConfig {
    /// Reads the cut orientation off a graph whose cut edges are all
    /// directed. Fails if some cut edge is undirected.
    pub fn from_graph(g: &MixedGraph, target: &[usize]) -> Result<Self> {
        let mut t = target.to_vec();
        t.sort_unstable();
        let arrows = g
            .cut_edges(&t)
            .into_iter()
            .map(|(u, w)| {
                if g.has_arrow(u, w) {
                    Ok((u, w))
                } else if g.has_arrow(w, u) {
                    Ok((w, u))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "cut edge {} - {} is not oriented",
                        g.name(u),
                        g.name(w)
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { target: t, arrows })
    }

    pub fn describe(&self, g: &MixedGraph) -> Vec<String> {
        self.arrows
            .iter()
            .map(|&(a, b)| format!("{} -> {}", g.name(a), g.name(b)))
            .collect()
    }
}

fn check_obs(m: &MixedGraph, obs: &Factor) -> Result<()> {
    let n = m.n();
    if obs.scope().len() != n || obs.scope().iter().enumerate().any(|(i, &v)| i != v) {
        return Err(Error::ScopeMismatch);
    }
    Ok(())
}

/// Whether some proper possibly causal path from `x` to `y` starts with an
/// undirected edge. Returns the offending pair when one exists.
pub fn blocking_path(m: &MixedGraph, x: &[usize], y: &[usize]) -> Option<(usize, usize)> {
    let n = m.n();
    let mut in_x = vec![false; n];
    for &v in x {
        in_x[v] = true;
    }
    let mut in_y = vec![false; n];
    for &v in y {
        in_y[v] = true;
    }
    for &s in x {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = m
            .undirected_neighbors(s)
            .into_iter()
            .filter(|&w| !in_x[w])
            .collect();
        for &w in &stack {
            seen[w] = true;
        }
        while let Some(v) = stack.pop() {
            if in_y[v] {
                return Some((s, v));
            }
            for w in m.children(v).into_iter().chain(m.undirected_neighbors(v)) {
                if !in_x[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    None
}

/// P(y | do(iv)) in the MPDAG `m`, computed from the observational joint
/// `obs` over all vertices. The result has scope `y` (sorted).
///
/// Buckets of An(Y) in `m` minus the intervened vertices contribute
/// P(b | pa(b)) with intervened parents clamped to their forced values.
/// Conditionals on parent configurations of zero probability are taken as
/// uniform; such configurations carry no mass in the sum.
pub fn identify_effect(
    m: &MixedGraph,
    iv: &Intervention,
    y: &[usize],
    obs: &Factor,
) -> Result<Factor> {
    check_obs(m, obs)?;
    let n = m.n();
    let card = obs.card();
    iv.check(card)?;
    let x = iv.targets();
    let mut y: Vec<usize> = y.to_vec();
    y.sort_unstable();
    y.dedup();
    if let Some(&v) = y.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange(v));
    }
    if y.iter().any(|v| x.contains(v)) {
        return Err(Error::InvalidArgument(
            "intervened and outcome sets overlap".into(),
        ));
    }
    if let Some((s, t)) = blocking_path(m, x, &y) {
        return Err(Error::NotIdentifiable(format!(
            "possibly causal path from {} to {} starts with an undirected edge",
            m.name(s),
            m.name(t)
        )));
    }
    let allowed: Vec<bool> = (0..n).map(|v| !x.contains(&v)).collect();
    let anc = m.ancestors_within(&y, &allowed);
    let buckets = pco(m, &anc)?.buckets;
    let mut in_anc = vec![false; n];
    for &v in &anc {
        in_anc[v] = true;
    }

    struct Term {
        size: usize,
        joint: Factor,
        parents: Factor,
    }
    let mut terms = Vec::with_capacity(buckets.len());
    for b in &buckets {
        let mut pa: Vec<usize> = b.iter().flat_map(|&v| m.parents(v)).collect();
        pa.sort_unstable();
        pa.dedup();
        pa.retain(|v| !b.contains(v));
        if let Some(&v) = pa.iter().find(|&&v| !in_anc[v] && !x.contains(&v)) {
            return Err(Error::NotIdentifiable(format!(
                "parent {} of a bucket lies outside the ancestral set",
                m.name(v)
            )));
        }
        let mut fam: Vec<usize> = b.iter().chain(&pa).copied().collect();
        fam.sort_unstable();
        terms.push(Term {
            size: b.iter().map(|&v| card[v]).product(),
            joint: obs.marginal(&fam),
            parents: obs.marginal(&pa),
        });
    }

    let ycard: Vec<usize> = y.iter().map(|&v| card[v]).collect();
    let mut out = Factor::zeros(y.clone(), ycard)?;
    let mut full = vec![0; n];
    for (&v, &val) in x.iter().zip(iv.values()) {
        full[v] = val;
    }
    let radix: Vec<usize> = anc.iter().map(|&v| card[v]).collect();
    let mut digits = vec![0; anc.len()];
    loop {
        for (&v, &d) in anc.iter().zip(&digits) {
            full[v] = d;
        }
        let mut p = 1.0;
        for t in &terms {
            let den = t.parents.get_full(&full);
            p *= if den > 0.0 {
                t.joint.get_full(&full) / den
            } else {
                1.0 / t.size as f64
            };
            if p == 0.0 {
                break;
            }
        }
        let idx = out.index_full(&full);
        out.values_mut()[idx] += p;
        if !increment(&mut digits, &radix) {
            break;
        }
    }
    Ok(out)
}

/// Every orientation of the undirected edges cut by `s`, closed under Meek's
/// rules, that still describes at least one DAG of the class of `m`.
///
/// Orientation vectors run over the undirected cut edges in
/// [`MixedGraph::cut_edges`] order, lexicographically with `inside ->
/// outside` first. Closures that are cyclic, create new unshielded
/// colliders, or admit no consistent DAG extension are dropped.
pub fn enumerate_cut_configs(m: &MixedGraph, s: &[usize]) -> Result<Vec<(CutConfig, MixedGraph)>> {
    m.clone().with_kind(GraphKind::Mpdag).validate()?;
    let mut target = s.to_vec();
    target.sort_unstable();
    target.dedup();
    if let Some(&v) = target.iter().find(|&&v| v >= m.n()) {
        return Err(Error::VertexOutOfRange(v));
    }
    let open: Vec<(usize, usize)> = m
        .cut_edges(&target)
        .into_iter()
        .filter(|&(u, w)| m.has_undirected(u, w))
        .collect();
    if open.len() > 24 {
        return Err(Error::InvalidArgument(format!(
            "{} undirected cut edges are too many to enumerate",
            open.len()
        )));
    }
    let base_colliders = m.v_structures();
    let mut out = Vec::new();
    let mut dropped = 0usize;
    let k = open.len();
    for mask in 0u32..(1u32 << k) {
        let mut g = m.clone();
        for (i, &(u, w)) in open.iter().enumerate() {
            if (mask >> (k - 1 - i)) & 1 == 0 {
                g.orient(u, w);
            } else {
                g.orient(w, u);
            }
        }
        let closed = match apply_meek_rules(&g) {
            Ok(c) => c.with_kind(GraphKind::Mpdag),
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        let valid = closed.is_directed_acyclic()
            && closed.v_structures() == base_colliders
            && closed.validate().is_ok()
            && consistent_extension(&closed).is_some();
        if !valid {
            dropped += 1;
            continue;
        }
        out.push((CutConfig::from_graph(&closed, &target)?, closed));
    }
    if dropped > 0 {
        log::debug!(
            "target {:?}: dropped {dropped} of {} cut orientations",
            m.set_names(&target),
            1u64 << k
        );
    }
    Ok(out)
}

/// Candidate interventional distributions for one target set: for each
/// valid cut configuration and each realization of the target, the
/// distribution of the remaining vertices.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    pub target: Vec<usize>,
    pub realizations: Vec<Intervention>,
    pub configs: Vec<CutConfig>,
    pub closures: Vec<MixedGraph>,
    /// `factors[c][r]`: configuration `c`, realization `r`.
    pub factors: Vec<Vec<Factor>>,
}

impl CandidateSet {
    pub fn outcome_scope(&self) -> &[usize] {
        self.factors
            .first()
            .and_then(|f| f.first())
            .map_or(&[], |f| f.scope())
    }

    pub fn config_index(&self, c: &CutConfig) -> Option<usize> {
        self.configs.iter().position(|x| x == c)
    }

    /// Largest per-realization L1 distance between configurations `a` and
    /// `b`.
    pub fn separation(&self, a: usize, b: usize) -> f64 {
        self.factors[a]
            .iter()
            .zip(&self.factors[b])
            .map(|(p, q)| p.l1(q).expect("same outcome scope"))
            .fold(0.0, f64::max)
    }

    /// Closest pair of configurations by [`Self::separation`].
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..self.configs.len() {
            for b in a + 1..self.configs.len() {
                let d = self.separation(a, b);
                if best.is_none_or(|(_, _, e)| d < e) {
                    best = Some((a, b, d));
                }
            }
        }
        best
    }

    /// Debug dump: one entry per configuration with its arrows and a table
    /// per realization.
    pub fn to_json(&self, g: &MixedGraph) -> Value {
        let configs: Vec<Value> = self
            .configs
            .iter()
            .zip(&self.factors)
            .map(|(c, fs)| {
                let dists: Vec<Value> = self
                    .realizations
                    .iter()
                    .zip(fs)
                    .map(|(r, f)| json!({ "do": r.label(g.names()), "p": f.values() }))
                    .collect();
                json!({ "cut": c.describe(g), "distributions": dists })
            })
            .collect();
        json!({
            "target": g.set_names(&self.target),
            "outcome": g.set_names(self.outcome_scope()),
            "configs": configs,
        })
    }
}

/// Enumerates the cut configurations of `s` in `m` and evaluates every
/// candidate P_s(V \ S) from the observational joint.
pub fn candidate_distributions(m: &MixedGraph, s: &[usize], obs: &Factor) -> Result<CandidateSet> {
    check_obs(m, obs)?;
    let configs = enumerate_cut_configs(m, s)?;
    let target = configs
        .first()
        .map(|c| c.0.target.clone())
        .unwrap_or_else(|| {
            let mut t = s.to_vec();
            t.sort_unstable();
            t.dedup();
            t
        });
    let rest: Vec<usize> = (0..m.n()).filter(|v| !target.contains(v)).collect();
    let reals = realizations(&target, obs.card());
    let mut set = CandidateSet {
        target,
        realizations: reals,
        configs: Vec::with_capacity(configs.len()),
        closures: Vec::with_capacity(configs.len()),
        factors: Vec::with_capacity(configs.len()),
    };
    for (cfg, closed) in configs {
        let row = set
            .realizations
            .iter()
            .map(|iv| identify_effect(&closed, iv, &rest, obs))
            .collect::<Result<Vec<_>>>()?;
        set.configs.push(cfg);
        set.closures.push(closed);
        set.factors.push(row);
    }
    Ok(set)
}
