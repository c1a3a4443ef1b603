use rand::Rng;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::graph::apply_meek_rules;
use crate::graph::MixedGraph;
use crate::net::{realizations, Intervention};
use crate::separating::TargetFamily;
use crate::tracker::Environment;

/// Significance level of the baseline's dependence test.
pub const BASELINE_ALPHA: f64 = 0.05;
/// Pooled samples a target needs before its cut edges are tested.
pub const BASELINE_MIN_SAMPLES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// No usable table: fewer than two nonempty rows or columns.
    pub abstained: bool,
}

/// Pearson's independence test on a contingency table. Empty rows and
/// columns are dropped; tables left with a single row or column abstain
/// with `p = 1`.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquare> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("ragged contingency table".into()));
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let rows_kept: Vec<usize> = (0..table.len()).filter(|&i| row_sums[i] > 0).collect();
    let cols_kept: Vec<usize> = (0..cols).filter(|&j| col_sums[j] > 0).collect();
    if rows_kept.len() < 2 || cols_kept.len() < 2 {
        return Ok(ChiSquare {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
            abstained: true,
        });
    }
    let total: u64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for &i in &rows_kept {
        for &j in &cols_kept {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            let diff = table[i][j] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = (rows_kept.len() - 1) * (cols_kept.len() - 1);
    let p_value = if statistic <= 0.0 {
        1.0
    } else {
        gamma_ur(df as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
    };
    Ok(ChiSquare {
        statistic,
        df,
        p_value,
        abstained: false,
    })
}

/// One round of the baseline.
#[derive(Clone, Debug)]
pub struct BaselineRound {
    pub intervention: Intervention,
    pub estimate: MixedGraph,
}

/// Random interventions within the target family. Once a target has enough
/// pooled samples, each of its still undirected cut edges `u - w` is tested
/// for dependence between the value assigned to `u` and the value of `w`:
/// dependence orients `u -> w`, independence `w -> u`.
pub struct RandomBaseline<'a> {
    cpdag: &'a MixedGraph,
    family: &'a TargetFamily,
    options: Vec<Vec<Intervention>>,
    /// Per target: the intervened assignment and outcome of every sample.
    pooled: Vec<Vec<(usize, Vec<usize>)>>,
    pub estimate: MixedGraph,
}

impl<'a> RandomBaseline<'a> {
    pub fn new(cpdag: &'a MixedGraph, family: &'a TargetFamily, card: &[usize]) -> Result<Self> {
        if card.len() != cpdag.n() {
            return Err(Error::InvalidArgument(
                "one cardinality per vertex required".into(),
            ));
        }
        let options = family.sets.iter().map(|s| realizations(s, card)).collect();
        Ok(Self {
            cpdag,
            family,
            options,
            pooled: vec![Vec::new(); family.sets.len()],
            estimate: cpdag.clone(),
        })
    }

    /// Draws one sample and updates the orientation estimate.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        env: &mut dyn Environment,
        rng: &mut R,
    ) -> Result<BaselineRound> {
        if self.family.is_empty() {
            return Err(Error::InvalidArgument(
                "baseline needs a nonempty target family".into(),
            ));
        }
        let t = rng.random_range(0..self.family.len());
        let r = rng.random_range(0..self.options[t].len());
        let iv = self.options[t][r].clone();
        let sample = env.sample(&iv);
        self.pooled[t].push((r, sample));
        self.orient_target(t)?;
        Ok(BaselineRound {
            intervention: iv,
            estimate: self.estimate.clone(),
        })
    }

    fn orient_target(&mut self, t: usize) -> Result<()> {
        let set = &self.family.sets[t];
        let pooled = &self.pooled[t];
        if pooled.len() < BASELINE_MIN_SAMPLES {
            return Ok(());
        }
        for (u, w) in self.cpdag.cut_edges(set) {
            if !self.estimate.has_undirected(u, w) {
                continue;
            }
            let pos = set
                .iter()
                .position(|&x| x == u)
                .expect("cut tail lies in the target");
            let levels_u = self.options[t]
                .iter()
                .map(|iv| iv.values()[pos])
                .max()
                .unwrap_or(0)
                + 1;
            let levels_w = pooled.iter().map(|(_, s)| s[w]).max().unwrap_or(0) + 1;
            let mut table = vec![vec![0u64; levels_w]; levels_u];
            for (r, s) in pooled {
                table[self.options[t][*r].values()[pos]][s[w]] += 1;
            }
            let test = chi_square_independence(&table)?;
            let (a, b) = if !test.abstained && test.p_value < BASELINE_ALPHA {
                (u, w)
            } else {
                (w, u)
            };
            let mut g = self.estimate.clone();
            g.orient(a, b);
            if let Ok(closed) = apply_meek_rules(&g) {
                if closed.is_directed_acyclic() {
                    self.estimate = closed;
                }
            }
        }
        Ok(())
    }
}

/// Runs the baseline for `budget` samples, returning the estimate after
/// every round.
pub fn random_baseline<R: Rng + ?Sized>(
    env: &mut dyn Environment,
    cpdag: &MixedGraph,
    family: &TargetFamily,
    card: &[usize],
    budget: u64,
    rng: &mut R,
) -> Result<Vec<BaselineRound>> {
    let mut b = RandomBaseline::new(cpdag, family, card)?;
    (0..budget).map(|_| b.step(env, rng)).collect()
}
