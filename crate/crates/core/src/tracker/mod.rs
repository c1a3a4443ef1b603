//! Track-and-stop causal discovery: hypotheses, the sampling loop, and the
//! stopping rule.

mod game;
mod hedge;
mod threshold;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::effects::{candidate_distributions, CandidateSet, CutConfig};
use crate::error::{Error, Result};
use crate::graph::{
    apply_meek_rules, consistent_extension, enumerate_mec_capped, shd, GraphKind, MixedGraph,
};
use crate::net::{DiscreteNet, Factor, Intervention};
use crate::separating::TargetFamily;

pub use game::{solve_matrix_game, GameSolution};
pub use hedge::AdaHedge;
pub use threshold::{ln_threshold_f, should_stop, threshold_f};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One hypothesis per DAG of the equivalence class.
    Exact,
    /// Independent hypotheses per target: the orientation of its cut.
    Practical,
}

#[derive(Clone, Debug)]
pub struct HypothesisOptions {
    /// Floor applied to model probabilities inside logarithms.
    pub prob_floor: f64,
    /// Largest equivalence class accepted in exact mode.
    pub exact_cap: usize,
    /// Reward clipping cap; defaults to the largest pairwise candidate KL.
    pub reward_cap: Option<f64>,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self {
            prob_floor: 1e-9,
            exact_cap: 4096,
            reward_cap: None,
        }
    }
}

/// One intervention of the action space with its precomputed model tables.
#[derive(Clone, Debug)]
pub struct Arm {
    pub intervention: Intervention,
    /// Index into [`Hypotheses::targets`].
    pub target: usize,
    /// Index of the realization within the target's candidate set.
    pub realization: usize,
    /// `log_p[c][o]`: clipped log-probability of outcome `o` under config `c`.
    log_p: Vec<Vec<f64>>,
    /// `zero_p[c][o]`: whether config `c` gives outcome `o` probability zero.
    zero_p: Vec<Vec<bool>>,
}

impl Arm {
    pub fn n_outcomes(&self) -> usize {
        self.log_p.first().map_or(0, Vec::len)
    }
}

/// Everything the tracker compares the data against, computed once.
#[derive(Clone, Debug)]
pub struct Hypotheses {
    pub mode: Mode,
    pub cpdag: MixedGraph,
    /// Targets whose cut has at least two valid orientations.
    pub targets: Vec<CandidateSet>,
    /// The action space: all realizations of every kept target.
    pub arms: Vec<Arm>,
    /// Exact mode: the members of the equivalence class.
    pub dags: Vec<MixedGraph>,
    /// Exact mode: `dag_configs[d][t]` is the config of target `t` in DAG `d`.
    pub dag_configs: Vec<Vec<usize>>,
    /// Size of the joint domain of all variables.
    pub joint_size: usize,
    pub reward_cap: f64,
    pub prob_floor: f64,
}

impl Hypotheses {
    pub fn build(
        cpdag: &MixedGraph,
        obs: &Factor,
        family: &TargetFamily,
        mode: Mode,
        opts: &HypothesisOptions,
    ) -> Result<Self> {
        if !(opts.prob_floor > 0.0 && opts.prob_floor < 1.0) {
            return Err(Error::InvalidArgument(
                "probability floor must lie in (0, 1)".into(),
            ));
        }
        let joint_size = obs.len();
        let mut targets = Vec::new();
        for s in &family.sets {
            let set = candidate_distributions(cpdag, s, obs)?;
            if set.configs.len() >= 2 {
                targets.push(set);
            }
        }
        let (dags, dag_configs) = if mode == Mode::Exact {
            let dags = enumerate_mec_capped(cpdag, opts.exact_cap)?;
            let mut configs = Vec::with_capacity(dags.len());
            for d in &dags {
                let row = targets
                    .iter()
                    .map(|t| {
                        let c = CutConfig::from_graph(d, &t.target)?;
                        t.config_index(&c).ok_or_else(|| {
                            Error::InvalidArgument(format!(
                                "DAG cut {:?} missing from the candidate set",
                                c.describe(d)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                configs.push(row);
            }
            for i in 0..configs.len() {
                for j in i + 1..configs.len() {
                    if configs[i] == configs[j] {
                        return Err(Error::InvalidArgument(
                            "target family does not separate the equivalence class".into(),
                        ));
                    }
                }
            }
            (dags, configs)
        } else {
            (Vec::new(), Vec::new())
        };

        let floor = opts.prob_floor;
        let mut arms = Vec::new();
        let mut cap: f64 = 0.0;
        for (ti, set) in targets.iter().enumerate() {
            for (ri, iv) in set.realizations.iter().enumerate() {
                let log_p: Vec<Vec<f64>> = set
                    .factors
                    .iter()
                    .map(|fs| fs[ri].values().iter().map(|&p| p.max(floor).ln()).collect())
                    .collect();
                let zero_p = set
                    .factors
                    .iter()
                    .map(|fs| fs[ri].values().iter().map(|&p| p <= 0.0).collect())
                    .collect();
                for a in 0..set.factors.len() {
                    for b in 0..set.factors.len() {
                        if a != b {
                            let pa = set.factors[a][ri].values();
                            let d: f64 = pa
                                .iter()
                                .zip(&log_p[b])
                                .filter(|(&p, _)| p > 0.0)
                                .map(|(&p, &lq)| p * (p.ln() - lq))
                                .sum();
                            cap = cap.max(d);
                        }
                    }
                }
                arms.push(Arm {
                    intervention: iv.clone(),
                    target: ti,
                    realization: ri,
                    log_p,
                    zero_p,
                });
            }
        }
        let reward_cap = opts.reward_cap.unwrap_or(if cap > 0.0 { cap } else { 1.0 });
        Ok(Self {
            mode,
            cpdag: cpdag.clone(),
            targets,
            arms,
            dags,
            dag_configs,
            joint_size,
            reward_cap,
            prob_floor: floor,
        })
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    /// Model distribution of arm `a` under config `c` of its target.
    pub fn model(&self, a: usize, c: usize) -> &Factor {
        let arm = &self.arms[a];
        &self.targets[arm.target].factors[c][arm.realization]
    }

    /// Arm indices grouped by target.
    pub fn arms_of_targets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.targets.len()];
        for (i, arm) in self.arms.iter().enumerate() {
            out[arm.target].push(i);
        }
        out
    }

    /// Config indices (one per target) of a DAG of the class.
    pub fn configs_of(&self, dag: &MixedGraph) -> Result<Vec<usize>> {
        self.targets
            .iter()
            .map(|t| {
                let c = CutConfig::from_graph(dag, &t.target)?;
                t.config_index(&c).ok_or_else(|| {
                    Error::InvalidArgument("DAG is not in the hypothesis set".into())
                })
            })
            .collect()
    }

    fn clipped_kl(&self, p: &Factor, a: usize, c: usize) -> f64 {
        p.values()
            .iter()
            .zip(&self.arms[a].log_p[c])
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, &lq)| x * (x.ln() - lq))
            .sum::<f64>()
            .max(0.0)
    }

    /// Characteristic time quantity c(D*) for the true DAG: the value of the
    /// game between allocations over arms and alternative DAGs. Exact mode
    /// only.
    pub fn oracle_complexity(&self, truth: &MixedGraph) -> Result<GameSolution> {
        if self.mode != Mode::Exact {
            return Err(Error::InvalidArgument(
                "oracle complexity needs exact hypotheses".into(),
            ));
        }
        let tc = self.configs_of(truth)?;
        let ti = self
            .dag_configs
            .iter()
            .position(|c| *c == tc)
            .ok_or_else(|| Error::InvalidArgument("truth is not a hypothesis".into()))?;
        let mut rows = Vec::new();
        for (d, cfg) in self.dag_configs.iter().enumerate() {
            if d == ti {
                continue;
            }
            rows.push(
                (0..self.n_arms())
                    .map(|a| {
                        let t = self.arms[a].target;
                        self.clipped_kl(self.model(a, tc[t]), a, cfg[t])
                    })
                    .collect(),
            );
        }
        solve_matrix_game(&rows, self.n_arms())
    }

    /// The relaxation c̲(D*): alternatives change the cut of a single target.
    pub fn oracle_complexity_lower(&self, truth: &MixedGraph) -> Result<GameSolution> {
        let tc = self.configs_of(truth)?;
        let mut rows = Vec::new();
        for (t, set) in self.targets.iter().enumerate() {
            for c in 0..set.configs.len() {
                if c == tc[t] {
                    continue;
                }
                rows.push(
                    (0..self.n_arms())
                        .map(|a| {
                            if self.arms[a].target == t {
                                self.clipped_kl(self.model(a, tc[t]), a, c)
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                );
            }
        }
        solve_matrix_game(&rows, self.n_arms())
    }
}

/// Source of interventional samples.
pub trait Environment {
    fn sample(&mut self, iv: &Intervention) -> Vec<usize>;
}

/// Draws from a known network with a seeded generator.
pub struct NetEnv<'a> {
    pub net: &'a DiscreteNet,
    pub rng: ChaCha8Rng,
}

impl<'a> NetEnv<'a> {
    pub fn new(net: &'a DiscreteNet, seed: u64) -> Self {
        Self {
            net,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Environment for NetEnv<'_> {
    fn sample(&mut self, iv: &Intervention) -> Vec<usize> {
        self.net.draw_sample(iv, &mut self.rng)
    }
}

/// Counts and sufficient statistics of one run.
#[derive(Clone, Debug)]
pub struct TrackerState {
    /// Samples drawn so far.
    pub t: u64,
    /// N_t(s) per arm.
    pub counts: Vec<u64>,
    /// N_t(s, v) per arm and outcome index.
    pub outcome_counts: Vec<Vec<u64>>,
    /// Σ_i α_{s,i} per arm.
    pub alloc_sum: Vec<f64>,
    /// Σ_v N(v) ln N(v) - N ln N per arm.
    negentropy: Vec<f64>,
    /// Σ_v N(v) ln P^c(v) per arm and config.
    cross: Vec<Vec<f64>>,
    /// Observed outcomes that config `c` deems impossible, per arm.
    impossible: Vec<Vec<u64>>,
}

fn xlnx(x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        let x = x as f64;
        x * x.ln()
    }
}

impl TrackerState {
    pub fn new(hyp: &Hypotheses) -> Self {
        Self {
            t: 0,
            counts: vec![0; hyp.n_arms()],
            outcome_counts: hyp.arms.iter().map(|a| vec![0; a.n_outcomes()]).collect(),
            alloc_sum: vec![0.0; hyp.n_arms()],
            negentropy: vec![0.0; hyp.n_arms()],
            cross: hyp.arms.iter().map(|a| vec![0.0; a.log_p.len()]).collect(),
            impossible: hyp.arms.iter().map(|a| vec![0; a.log_p.len()]).collect(),
        }
    }

    /// Records outcome index `o` for arm `a`.
    pub fn record(&mut self, hyp: &Hypotheses, a: usize, o: usize) {
        let n = self.counts[a];
        let k = self.outcome_counts[a][o];
        self.negentropy[a] += xlnx(k + 1) - xlnx(k) - (xlnx(n + 1) - xlnx(n));
        self.counts[a] = n + 1;
        self.outcome_counts[a][o] = k + 1;
        let arm = &hyp.arms[a];
        for c in 0..arm.log_p.len() {
            self.cross[a][c] += arm.log_p[c][o];
            if arm.zero_p[c][o] {
                self.impossible[a][c] += 1;
            }
        }
        self.t += 1;
    }

    /// N_t(s) · kl(P̄_s ‖ P^c_s) with clipped model probabilities.
    pub fn weighted_kl(&self, a: usize, c: usize) -> f64 {
        (self.negentropy[a] - self.cross[a][c]).max(0.0)
    }

    /// kl(P̄_s ‖ P^c_s), `+inf` when an observed outcome has probability zero.
    pub fn empirical_kl(&self, a: usize, c: usize) -> f64 {
        if self.impossible[a][c] > 0 {
            f64::INFINITY
        } else if self.counts[a] == 0 {
            0.0
        } else {
            self.weighted_kl(a, c) / self.counts[a] as f64
        }
    }

    pub fn empirical(&self, hyp: &Hypotheses, a: usize) -> Factor {
        let model = hyp.model(a, 0);
        let n = self.counts[a].max(1) as f64;
        let values = self.outcome_counts[a]
            .iter()
            .map(|&k| k as f64 / n)
            .collect();
        Factor::new(model.scope().to_vec(), model.card().to_vec(), values)
            .expect("same shape as the model")
    }

    /// Per-target, per-config totals `(impossible, Σ weighted kl)`.
    fn target_scores(&self, hyp: &Hypotheses, groups: &[Vec<usize>]) -> Vec<Vec<(u64, f64)>> {
        groups
            .iter()
            .enumerate()
            .map(|(t, arms)| {
                (0..hyp.targets[t].configs.len())
                    .map(|c| {
                        arms.iter().fold((0, 0.0), |(z, g), &a| {
                            (z + self.impossible[a][c], g + self.weighted_kl(a, c))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// The current most probable hypothesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    /// Index into [`Hypotheses::dags`].
    Dag(usize),
    /// One config index per target.
    Configs(Vec<usize>),
}

fn better(a: (u64, f64), b: (u64, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Maximum-likelihood hypothesis. Hypotheses that give an observed outcome
/// probability zero lose to any that do not; ties go to the lowest index.
pub fn most_probable(state: &TrackerState, hyp: &Hypotheses) -> Result<Choice> {
    let groups = hyp.arms_of_targets();
    let scores = state.target_scores(hyp, &groups);
    most_probable_from(hyp, &scores)
}

fn dag_score(hyp: &Hypotheses, scores: &[Vec<(u64, f64)>], d: usize) -> (u64, f64) {
    hyp.dag_configs[d]
        .iter()
        .enumerate()
        .fold((0, 0.0), |(z, g), (t, &c)| {
            (z + scores[t][c].0, g + scores[t][c].1)
        })
}

fn most_probable_from(hyp: &Hypotheses, scores: &[Vec<(u64, f64)>]) -> Result<Choice> {
    match hyp.mode {
        Mode::Exact => {
            if hyp.dags.is_empty() {
                return Err(Error::EmptyHypotheses);
            }
            let mut best = 0;
            for d in 1..hyp.dags.len() {
                if better(dag_score(hyp, scores, d), dag_score(hyp, scores, best)) {
                    best = d;
                }
            }
            Ok(Choice::Dag(best))
        }
        Mode::Practical => Ok(Choice::Configs(
            scores
                .iter()
                .map(|s| {
                    let mut best = 0;
                    for c in 1..s.len() {
                        if better(s[c], s[best]) {
                            best = c;
                        }
                    }
                    best
                })
                .collect(),
        )),
    }
}

/// Information distance from the data to the closest alternative of
/// `choice`; `+inf` when there is no alternative.
pub fn stopping_statistic(state: &TrackerState, hyp: &Hypotheses, choice: &Choice) -> f64 {
    let groups = hyp.arms_of_targets();
    let scores = state.target_scores(hyp, &groups);
    statistic_from(hyp, &scores, choice)
}

fn statistic_from(hyp: &Hypotheses, scores: &[Vec<(u64, f64)>], choice: &Choice) -> f64 {
    match choice {
        Choice::Dag(best) => {
            let zb = dag_score(hyp, scores, *best).0;
            (0..hyp.dags.len())
                .filter(|d| d != best)
                .map(|d| {
                    let (z, g) = dag_score(hyp, scores, d);
                    if z > zb {
                        f64::INFINITY
                    } else {
                        g
                    }
                })
                .fold(f64::INFINITY, f64::min)
        }
        Choice::Configs(best) => {
            let mut margin = f64::INFINITY;
            let mut base = 0.0;
            for (t, s) in scores.iter().enumerate() {
                let (zb, gb) = s[best[t]];
                base += gb;
                for (c, &(z, g)) in s.iter().enumerate() {
                    if c != best[t] {
                        let m = if z > zb { f64::INFINITY } else { g - gb };
                        margin = margin.min(m);
                    }
                }
            }
            if margin.is_infinite() {
                f64::INFINITY
            } else {
                (margin + base).max(0.0)
            }
        }
    }
}

/// Forced exploration, then allocation matching. `t` is the number of
/// samples drawn so far; `alloc_sum` already includes the current weights.
pub fn select_intervention(counts: &[u64], alloc_sum: &[f64], t: u64) -> usize {
    let root = (t as f64).sqrt();
    let (least, &min_n) = counts
        .iter()
        .enumerate()
        .min_by_key(|&(i, &n)| (n, i))
        .expect("nonempty action space");
    if (min_n as f64) < root {
        return least;
    }
    let mut best = 0;
    let mut best_ratio = f64::NEG_INFINITY;
    for (i, (&n, &a)) in counts.iter().zip(alloc_sum).enumerate() {
        let ratio = if n == 0 { f64::INFINITY } else { a / n as f64 };
        if ratio > best_ratio {
            best = i;
            best_ratio = ratio;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Terminated,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub delta: f64,
    pub max_samples: u64,
    /// Keep a per-round trace.
    pub trace: bool,
    /// When given, the trace records SHD of the current estimate to it.
    pub truth: Option<MixedGraph>,
}

impl RunConfig {
    pub fn new(delta: f64, max_samples: u64) -> Self {
        Self {
            delta,
            max_samples,
            trace: false,
            truth: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub arm: usize,
    pub d_t: f64,
    pub shd: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DiscoveryResult {
    pub mode: Mode,
    pub status: Status,
    pub stopping_time: u64,
    pub final_d: f64,
    pub choice: Choice,
    /// Chosen orientation of every target's cut.
    pub configs: Vec<CutConfig>,
    /// Graph implied by the choice: the DAG in exact mode; in practical mode
    /// the CPDAG with the agreed cut orientations, closed under Meek's rules.
    pub estimate: MixedGraph,
    /// Whether the practical choice is consistent with some DAG.
    pub realizable: bool,
    pub trace: Vec<TraceRow>,
    /// Per-arm sample counts at the end.
    pub counts: Vec<u64>,
}

impl DiscoveryResult {
    pub fn to_json(&self, hyp: &Hypotheses) -> Value {
        let g = &hyp.cpdag;
        let configs: Vec<Value> = self
            .configs
            .iter()
            .map(|c| json!({ "target": g.set_names(&c.target), "cut": c.describe(g) }))
            .collect();
        let arms: Vec<Value> = hyp
            .arms
            .iter()
            .zip(&self.counts)
            .map(|(a, n)| json!({ "do": a.intervention.label(g.names()), "samples": n }))
            .collect();
        let mut v = json!({
            "mode": self.mode,
            "status": self.status,
            "stopping_time": self.stopping_time,
            "final_d": self.final_d,
            "realizable": self.realizable,
            "estimate": self.estimate.to_string(),
            "configs": configs,
            "arms": arms,
        });
        if !self.trace.is_empty() {
            v["trace"] = self
                .trace
                .iter()
                .map(|r| {
                    json!({
                        "t": r.t,
                        "do": hyp.arms[r.arm].intervention.label(g.names()),
                        "d_t": r.d_t,
                        "shd": r.shd,
                    })
                })
                .collect();
        }
        v
    }
}

/// Orients the CPDAG by the chosen configs. Edges on which two targets
/// disagree stay undirected and make the choice unrealizable.
pub fn estimate_from_configs(hyp: &Hypotheses, configs: &[usize]) -> (MixedGraph, bool) {
    let mut g = hyp.cpdag.clone();
    let mut realizable = true;
    let mut wanted: Vec<(usize, usize)> = Vec::new();
    for (t, &c) in configs.iter().enumerate() {
        wanted.extend(hyp.targets[t].configs[c].arrows.iter().copied());
    }
    wanted.sort_unstable();
    wanted.dedup();
    for &(a, b) in &wanted {
        if wanted.binary_search(&(b, a)).is_ok() {
            realizable = false;
            continue;
        }
        if g.has_undirected(a, b) {
            g.orient(a, b);
        }
    }
    let closed = match apply_meek_rules(&g) {
        Ok(c) => c,
        Err(_) => return (g.with_kind(GraphKind::Pdag), false),
    };
    if closed.v_structures() != hyp.cpdag.v_structures() || consistent_extension(&closed).is_none()
    {
        realizable = false;
    }
    let cut_ok = wanted.iter().all(|&(a, b)| !closed.has_arrow(b, a));
    (closed.with_kind(GraphKind::Mpdag), realizable && cut_ok)
}

/// Per-run mutable machinery on top of [`TrackerState`].
pub struct Tracker<'h> {
    hyp: &'h Hypotheses,
    pub state: TrackerState,
    groups: Vec<Vec<usize>>,
    /// Exact: one hedge over all arms. Practical: one per target.
    hedges: Vec<AdaHedge>,
    /// Practical: Σ over rounds of ⟨ξ^S, r^S⟩.
    difficulty: Vec<f64>,
    hedge_rounds: u64,
    scores: Vec<Vec<(u64, f64)>>,
    choice: Choice,
    d: f64,
}

impl<'h> Tracker<'h> {
    pub fn new(hyp: &'h Hypotheses) -> Result<Self> {
        let groups = hyp.arms_of_targets();
        let state = TrackerState::new(hyp);
        let hedges = match hyp.mode {
            Mode::Exact => vec![AdaHedge::new(hyp.n_arms().max(1))],
            Mode::Practical => groups
                .iter()
                .map(|g| AdaHedge::new(g.len().max(1)))
                .collect(),
        };
        let scores = state.target_scores(hyp, &groups);
        let choice = most_probable_from(hyp, &scores)?;
        let d = statistic_from(hyp, &scores, &choice);
        Ok(Self {
            hyp,
            state,
            difficulty: vec![0.0; groups.len()],
            groups,
            hedges,
            hedge_rounds: 0,
            scores,
            choice,
            d,
        })
    }

    pub fn choice(&self) -> &Choice {
        &self.choice
    }

    pub fn statistic(&self) -> f64 {
        self.d
    }

    pub fn in_sweep(&self) -> bool {
        (self.state.t as usize) < self.hyp.n_arms()
    }

    /// Allocation α over the arms implied by the current hedge weights.
    pub fn allocation(&self) -> Vec<f64> {
        let k = self.hyp.n_arms();
        if self.in_sweep() {
            return vec![1.0 / k as f64; k];
        }
        match self.hyp.mode {
            Mode::Exact => self.hedges[0].weights(),
            Mode::Practical => {
                let gamma = self.target_weights();
                let mut alpha = vec![0.0; k];
                for (t, arms) in self.groups.iter().enumerate() {
                    let xi = self.hedges[t].weights();
                    for (&a, w) in arms.iter().zip(xi) {
                        alpha[a] = gamma[t] * w;
                    }
                }
                alpha
            }
        }
    }

    /// γ_S ∝ 1 / c_t(S); targets with no difficulty estimate yet share the
    /// mass uniformly.
    pub fn target_weights(&self) -> Vec<f64> {
        let m = self.groups.len();
        if self.hedge_rounds == 0 {
            return vec![1.0 / m as f64; m];
        }
        let zero: Vec<usize> = (0..m).filter(|&t| self.difficulty[t] <= 0.0).collect();
        if !zero.is_empty() {
            let mut g = vec![0.0; m];
            for &t in &zero {
                g[t] = 1.0 / zero.len() as f64;
            }
            return g;
        }
        let inv: Vec<f64> = self
            .difficulty
            .iter()
            .map(|&c| self.hedge_rounds as f64 / c)
            .collect();
        let s: f64 = inv.iter().sum();
        inv.iter().map(|x| x / s).collect()
    }

    fn reward(&self, a: usize, c: usize) -> f64 {
        self.state.empirical_kl(a, c).min(self.hyp.reward_cap)
    }

    /// Rewards at the played weights against the best-responding
    /// alternative, then one hedge step.
    fn update_hedges(&mut self, alpha: &[f64]) -> Result<()> {
        let hyp = self.hyp;
        match (&self.choice, hyp.mode) {
            (Choice::Dag(best), Mode::Exact) => {
                let mut alt: Option<(usize, f64)> = None;
                for (d, cfg) in hyp.dag_configs.iter().enumerate() {
                    if d == *best {
                        continue;
                    }
                    let v: f64 = (0..hyp.n_arms())
                        .map(|a| alpha[a] * self.reward(a, cfg[hyp.arms[a].target]))
                        .sum();
                    if alt.is_none_or(|(_, b)| v < b) {
                        alt = Some((d, v));
                    }
                }
                if let Some((d, _)) = alt {
                    let cfg = &hyp.dag_configs[d];
                    let r: Vec<f64> = (0..hyp.n_arms())
                        .map(|a| self.reward(a, cfg[hyp.arms[a].target]))
                        .collect();
                    self.hedges[0].step(&r)?;
                }
            }
            (Choice::Configs(best), Mode::Practical) => {
                for t in 0..self.groups.len() {
                    let arms = &self.groups[t];
                    let xi = self.hedges[t].weights();
                    let mut alt: Option<(usize, f64)> = None;
                    for c in 0..hyp.targets[t].configs.len() {
                        if c == best[t] {
                            continue;
                        }
                        let v: f64 = arms
                            .iter()
                            .zip(&xi)
                            .map(|(&a, w)| w * self.reward(a, c))
                            .sum();
                        if alt.is_none_or(|(_, b)| v < b) {
                            alt = Some((c, v));
                        }
                    }
                    if let Some((c, v)) = alt {
                        let r: Vec<f64> = arms.iter().map(|&a| self.reward(a, c)).collect();
                        self.hedges[t].step(&r)?;
                        self.difficulty[t] += v;
                    }
                }
            }
            _ => unreachable!("choice kind follows the mode"),
        }
        self.hedge_rounds += 1;
        Ok(())
    }

    /// Picks the next arm and books its allocation.
    pub fn next_arm(&mut self) -> (usize, Vec<f64>) {
        let alpha = self.allocation();
        for (s, a) in self.state.alloc_sum.iter_mut().zip(&alpha) {
            *s += a;
        }
        let arm = if self.in_sweep() {
            self.state.t as usize
        } else {
            select_intervention(&self.state.counts, &self.state.alloc_sum, self.state.t)
        };
        (arm, alpha)
    }

    /// Books a full-assignment sample for `arm` and refreshes the statistic.
    pub fn observe(&mut self, arm: usize, sample: &[usize], alpha: &[f64]) -> Result<()> {
        let was_sweep = self.in_sweep();
        let o = self.hyp.model(arm, 0).index_full(sample);
        self.state.record(self.hyp, arm, o);
        self.scores = self.state.target_scores(self.hyp, &self.groups);
        self.choice = most_probable_from(self.hyp, &self.scores)?;
        self.d = statistic_from(self.hyp, &self.scores, &self.choice);
        if !was_sweep {
            self.update_hedges(alpha)?;
        }
        Ok(())
    }

    pub fn should_stop(&self, delta: f64) -> bool {
        let k = self.hyp.n_arms();
        if k == 0 {
            return true;
        }
        !self.in_sweep() && should_stop(self.d, self.state.t, k, self.hyp.joint_size, delta)
    }
}

/// Runs track-and-stop until the stopping rule fires or the sample cap is
/// reached.
pub fn run(
    hyp: &Hypotheses,
    env: &mut dyn Environment,
    cfg: &RunConfig,
) -> Result<DiscoveryResult> {
    run_observed(hyp, env, cfg, &mut |_| {})
}

/// As [`run`], calling `observer` after every sample.
pub fn run_observed(
    hyp: &Hypotheses,
    env: &mut dyn Environment,
    cfg: &RunConfig,
    observer: &mut dyn FnMut(&TrackerState),
) -> Result<DiscoveryResult> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {}",
            cfg.delta
        )));
    }
    let mut tracker = Tracker::new(hyp)?;
    let mut trace = Vec::new();
    let mut cached: Option<(Choice, MixedGraph, bool)> = None;
    let mut estimate = |choice: &Choice| -> (MixedGraph, bool) {
        if let Some((c, g, r)) = &cached {
            if c == choice {
                return (g.clone(), *r);
            }
        }
        let (g, r) = match choice {
            Choice::Dag(d) => (hyp.dags[*d].clone(), true),
            Choice::Configs(cs) => estimate_from_configs(hyp, cs),
        };
        cached = Some((choice.clone(), g.clone(), r));
        (g, r)
    };
    let status = loop {
        if tracker.should_stop(cfg.delta) {
            break Status::Terminated;
        }
        if tracker.state.t >= cfg.max_samples {
            break Status::Inconclusive;
        }
        let (arm, alpha) = tracker.next_arm();
        let sample = env.sample(&hyp.arms[arm].intervention);
        tracker.observe(arm, &sample, &alpha)?;
        observer(&tracker.state);
        if cfg.trace {
            let shd = match &cfg.truth {
                Some(truth) => Some(shd(&estimate(tracker.choice()).0, truth)?),
                None => None,
            };
            trace.push(TraceRow {
                t: tracker.state.t,
                arm,
                d_t: tracker.statistic(),
                shd,
            });
        }
    };
    let choice = tracker.choice().clone();
    let configs_idx: Vec<usize> = match &choice {
        Choice::Dag(d) => hyp.dag_configs[*d].clone(),
        Choice::Configs(c) => c.clone(),
    };
    let configs = configs_idx
        .iter()
        .enumerate()
        .map(|(t, &c)| hyp.targets[t].configs[c].clone())
        .collect();
    let (est, realizable) = estimate(&choice);
    if !realizable {
        log::warn!(
            "chosen cut orientations are not realizable by a single DAG; consider a smaller delta"
        );
    }
    Ok(DiscoveryResult {
        mode: hyp.mode,
        status,
        stopping_time: tracker.state.t,
        final_d: tracker.statistic(),
        choice,
        configs,
        estimate: est,
        realizable,
        trace,
        counts: tracker.state.counts.clone(),
    })
}
