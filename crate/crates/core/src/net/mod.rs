//! Discrete Bayesian networks: conditional probability tables, exact joint
//! and interventional distributions, and ancestral sampling.

mod bif;
mod factor;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphKind, MixedGraph};

pub use bif::{parse_bif, write_bif};
pub(crate) use factor::increment;
pub use factor::{kl, Factor};

/// Default cap on the number of cells in a materialized joint distribution.
pub const JOINT_CELL_CAP: usize = 1 << 24;

/// A do-intervention `do(S = s)`. Targets are kept sorted; `values[i]` is the
/// value forced on `targets[i]`. Empty targets denote the observational arm.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Intervention {
    targets: Vec<usize>,
    values: Vec<usize>,
}

impl Intervention {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::BadIntervention("variable intervened twice".into()));
        }
        Ok(Self {
            targets: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn observational() -> Self {
        Self {
            targets: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value_of(&self, v: usize) -> Option<usize> {
        self.targets.binary_search(&v).ok().map(|i| self.values[i])
    }

    pub fn check(&self, card: &[usize]) -> Result<()> {
        for (&v, &x) in self.targets.iter().zip(&self.values) {
            if v >= card.len() {
                return Err(Error::BadIntervention(format!("variable {v} out of range")));
            }
            if x >= card[v] {
                return Err(Error::BadIntervention(format!(
                    "value {x} outside the domain of variable {v}"
                )));
            }
        }
        Ok(())
    }

    /// `V1=0&V3=1` style label; `obs` for the observational arm.
    pub fn label(&self, names: &[String]) -> String {
        if self.targets.is_empty() {
            return "obs".to_string();
        }
        self.targets
            .iter()
            .zip(&self.values)
            .map(|(&v, &x)| format!("{}={}", names[v], x))
            .collect::<Vec<_>>()
            .join("&")
    }
}

/// All realizations of `targets` in lexicographic order of their values.
pub fn realizations(targets: &[usize], card: &[usize]) -> Vec<Intervention> {
    let mut t: Vec<usize> = targets.to_vec();
    t.sort_unstable();
    t.dedup();
    let radix: Vec<usize> = t.iter().map(|&v| card[v]).collect();
    let mut digits = vec![0; t.len()];
    let mut out = Vec::new();
    loop {
        out.push(Intervention {
            targets: t.clone(),
            values: digits.clone(),
        });
        if !increment(&mut digits, &radix) {
            return out;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    /// Parents in increasing index order; rows are indexed by their joint
    /// assignment, last parent fastest.
    pub parents: Vec<usize>,
    /// Row-major table of `rows * card[child]` probabilities.
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteNet {
    name: String,
    graph: MixedGraph,
    card: Vec<usize>,
    states: Vec<Vec<String>>,
    cpts: Vec<Cpt>,
    order: Vec<usize>,
}

impl DiscreteNet {
    /// Builds a network over the DAG `graph`. `tables[v]` lists the rows of
    /// P(v | parents) with parents in increasing index order. Rows must sum
    /// to one within 1e-6 and are renormalized exactly.
    pub fn new(graph: MixedGraph, card: Vec<usize>, tables: Vec<Vec<f64>>) -> Result<Self> {
        let states = card
            .iter()
            .map(|&k| (0..k).map(|i| i.to_string()).collect())
            .collect();
        Self::with_states("net".into(), graph, states, tables)
    }

    pub fn with_states(
        name: String,
        graph: MixedGraph,
        states: Vec<Vec<String>>,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = graph.n();
        if states.len() != n || tables.len() != n {
            return Err(Error::InvalidNetwork(
                "one state list and one table per variable required".into(),
            ));
        }
        if graph.n_undirected() > 0 {
            return Err(Error::InvalidNetwork("graph has undirected edges".into()));
        }
        let order = graph.topological_order().ok_or(Error::Cyclic)?;
        let card: Vec<usize> = states.iter().map(Vec::len).collect();
        if let Some(v) = card.iter().position(|&k| k == 0) {
            return Err(Error::InvalidNetwork(format!(
                "{} has no states",
                graph.name(v)
            )));
        }
        let mut cpts = Vec::with_capacity(n);
        for (v, mut table) in tables.into_iter().enumerate() {
            let parents = graph.parents(v);
            let rows: usize = parents.iter().map(|&p| card[p]).product();
            if table.len() != rows * card[v] {
                return Err(Error::InvalidNetwork(format!(
                    "table of {} has {} entries, expected {}",
                    graph.name(v),
                    table.len(),
                    rows * card[v]
                )));
            }
            for row in table.chunks_mut(card[v]) {
                if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return Err(Error::InvalidNetwork(format!(
                        "negative or non-finite probability in table of {}",
                        graph.name(v)
                    )));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidNetwork(format!(
                        "row of {} sums to {s}",
                        graph.name(v)
                    )));
                }
                row.iter_mut().for_each(|p| *p /= s);
            }
            cpts.push(Cpt { parents, table });
        }
        Ok(Self {
            name,
            graph: graph.with_kind(GraphKind::Dag),
            card,
            states,
            cpts,
            order,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.card.len()
    }

    pub fn card(&self) -> &[usize] {
        &self.card
    }

    pub fn states(&self) -> &[Vec<String>] {
        &self.states
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Number of cells of the joint domain, saturating.
    pub fn joint_size(&self) -> u128 {
        self.card
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
    }

    /// Row of P(v | parents) for the parent values read from `full`.
    pub fn row(&self, v: usize, full: &[usize]) -> &[f64] {
        let cpt = &self.cpts[v];
        let r = cpt
            .parents
            .iter()
            .fold(0, |acc, &p| acc * self.card[p] + full[p]);
        &cpt.table[r * self.card[v]..(r + 1) * self.card[v]]
    }

    /// Observational joint over all variables.
    pub fn joint(&self) -> Result<Factor> {
        self.interventional(&Intervention::observational())
    }

    /// Truncated factorization: the joint under `do(iv)`, with zero mass off
    /// the forced values.
    pub fn interventional(&self, iv: &Intervention) -> Result<Factor> {
        self.interventional_capped(iv, JOINT_CELL_CAP)
    }

    pub fn interventional_capped(&self, iv: &Intervention, cap: usize) -> Result<Factor> {
        iv.check(&self.card)?;
        let cells = self.joint_size();
        if cells > cap as u128 {
            return Err(Error::DomainTooLarge { cells, cap });
        }
        let n = self.n();
        let mut f = Factor::zeros((0..n).collect(), self.card.clone())?;
        let mut full = vec![0; n];
        for value in f.values_mut() {
            let consistent = iv
                .targets
                .iter()
                .zip(&iv.values)
                .all(|(&t, &x)| full[t] == x);
            if consistent {
                let mut p = 1.0;
                for v in 0..n {
                    if iv.value_of(v).is_none() {
                        p *= self.row(v, &full)[full[v]];
                    }
                }
                *value = p;
            }
            increment(&mut full, &self.card);
        }
        Ok(f)
    }

    /// One ancestral sample under `do(iv)`; intervened variables are clamped.
    pub fn draw_sample<R: Rng + ?Sized>(&self, iv: &Intervention, rng: &mut R) -> Vec<usize> {
        let mut full = vec![0; self.n()];
        for &v in &self.order {
            full[v] = match iv.value_of(v) {
                Some(x) => x,
                None => sample_row(self.row(v, &full), rng),
            };
        }
        full
    }
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}
