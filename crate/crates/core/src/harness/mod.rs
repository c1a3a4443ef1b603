//! Random instances, the random-intervention baseline, and batch trials.

mod baseline;
mod generate;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{cpdag_of, shd, MixedGraph};
use crate::net::{parse_bif, DiscreteNet};
use crate::separating::{graph_separating_system, TargetFamily};
use crate::tracker::{run, Hypotheses, HypothesisOptions, Mode, NetEnv, RunConfig, Status};

pub use baseline::{
    chi_square_independence, random_baseline, BaselineRound, ChiSquare, RandomBaseline,
    BASELINE_ALPHA, BASELINE_MIN_SAMPLES,
};
pub use generate::{random_chordal_dag, random_cpts};

pub const TRACE_HEADER: &str = "# tscd-trace v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Exact,
    Practical,
    RandomBaseline,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "practical" => Ok(Self::Practical),
            "random-baseline" | "random" => Ok(Self::RandomBaseline),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub rho: f64,
    /// States per variable of generated networks.
    pub card: usize,
    pub delta: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub seed: u64,
    pub max_samples: u64,
    /// Size bound for generated target sets; `None` for the smallest family.
    pub target_bound: Option<usize>,
    /// Target family file; generated per instance when absent.
    pub targets: Option<PathBuf>,
    /// Fixed network instead of random instances.
    pub bif: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Keep every `stride`-th trace row (and the last).
    pub stride: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nodes: 4,
            rho: 0.5,
            card: 2,
            delta: 0.1,
            algorithm: Algorithm::Practical,
            trials: 50,
            seed: 0,
            max_samples: 200_000,
            target_bound: Some(1),
            targets: None,
            bif: None,
            out: None,
            stride: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.bif.is_none() && self.nodes < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.nodes));
        }
        if self.card < 2 {
            return bad(format!("cardinality must be at least 2, got {}", self.card));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if self.target_bound == Some(0) {
            return bad("target bound must be at least 1".into());
        }
        Ok(())
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A network together with its CPDAG and target family.
#[derive(Clone, Debug)]
pub struct Instance {
    pub net: DiscreteNet,
    pub cpdag: MixedGraph,
    pub family: TargetFamily,
}

impl Instance {
    pub fn from_net(
        net: DiscreteNet,
        targets: Option<&Path>,
        target_bound: Option<usize>,
    ) -> Result<Self> {
        let cpdag = cpdag_of(net.graph())?;
        let family = match targets {
            Some(p) => TargetFamily::from_json(&read_file(p)?, &cpdag)?,
            None => graph_separating_system(&cpdag, target_bound)?,
        };
        Ok(Self { net, cpdag, family })
    }

    pub fn random(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let dag = random_chordal_dag(cfg.nodes, cfg.rho, rng)?;
        let net = random_cpts(&dag, &vec![cfg.card; cfg.nodes], rng)?;
        Self::from_net(net, cfg.targets.as_deref(), cfg.target_bound)
    }

    /// The instance of trial `trial`: the fixed network when `cfg.bif` is
    /// set, otherwise a fresh random one.
    pub fn for_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Self> {
        match &cfg.bif {
            Some(p) => Self::from_net(
                parse_bif(&read_file(p)?)?,
                cfg.targets.as_deref(),
                cfg.target_bound,
            ),
            None => Self::random(cfg, &mut trial_rng(cfg.seed, trial, 0)),
        }
    }

    pub fn hypotheses(&self, mode: Mode) -> Result<Hypotheses> {
        Hypotheses::build(
            &self.cpdag,
            &self.net.joint()?,
            &self.family,
            mode,
            &HypothesisOptions::default(),
        )
    }
}

/// Independent generator for one trial: stream 0 builds the instance,
/// stream 1 feeds the environment, stream 2 drives the baseline.
pub fn trial_rng(seed: u64, trial: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial as u64);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub t: u64,
    pub samples: u64,
    pub arm: String,
    pub d_t: Option<f64>,
    pub shd: usize,
    pub terminated: bool,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub trial: usize,
    pub records: Vec<TrialRecord>,
    pub samples_used: u64,
    pub terminated: bool,
    /// Final SHD to the truth is zero.
    pub correct: bool,
    pub initial_shd: usize,
    /// First sample count from which the SHD stays zero; `None` if it is
    /// nonzero at the end.
    pub samples_to_shd0: Option<u64>,
    pub error: Option<String>,
}

impl TrialOutcome {
    fn failed(trial: usize, msg: String) -> Self {
        Self {
            trial,
            records: Vec::new(),
            samples_used: 0,
            terminated: false,
            correct: false,
            initial_shd: 0,
            samples_to_shd0: None,
            error: Some(msg),
        }
    }
}

fn first_zero_run(
    shds: impl DoubleEndedIterator<Item = (u64, usize)>,
    initial: usize,
) -> Option<u64> {
    let mut from = if initial == 0 { Some(0) } else { None };
    let mut last_seen = initial;
    for (t, s) in shds {
        if s == 0 && last_seen != 0 {
            from = Some(t);
        } else if s != 0 {
            from = None;
        }
        last_seen = s;
    }
    from
}

/// Runs one trial of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialOutcome> {
    let inst = Instance::for_trial(cfg, trial)?;
    let truth = inst.net.graph();
    let initial_shd = shd(&inst.cpdag, truth)?;
    let mut env = NetEnv {
        net: &inst.net,
        rng: trial_rng(cfg.seed, trial, 1),
    };
    let names = truth.names();
    let keep = |t: u64, last: bool| last || t % cfg.stride == 0;
    match cfg.algorithm {
        Algorithm::Exact | Algorithm::Practical => {
            let mode = if cfg.algorithm == Algorithm::Exact {
                Mode::Exact
            } else {
                Mode::Practical
            };
            let hyp = inst.hypotheses(mode)?;
            let mut rc = RunConfig::new(cfg.delta, cfg.max_samples);
            rc.trace = true;
            rc.truth = Some(truth.clone());
            let res = run(&hyp, &mut env, &rc)?;
            let terminated = res.status == Status::Terminated;
            let n = res.trace.len();
            let records = res
                .trace
                .iter()
                .enumerate()
                .filter(|(i, r)| keep(r.t, i + 1 == n))
                .map(|(i, r)| TrialRecord {
                    trial,
                    t: r.t,
                    samples: r.t,
                    arm: hyp.arms[r.arm].intervention.label(names),
                    d_t: Some(r.d_t),
                    shd: r.shd.unwrap_or(0),
                    terminated: terminated && i + 1 == n,
                })
                .collect();
            let final_shd = shd(&res.estimate, truth)?;
            let samples_to_shd0 = if res.trace.is_empty() {
                (final_shd == 0).then_some(0)
            } else {
                first_zero_run(
                    res.trace.iter().map(|r| (r.t, r.shd.unwrap_or(0))),
                    initial_shd,
                )
            };
            Ok(TrialOutcome {
                trial,
                records,
                samples_used: res.stopping_time,
                terminated,
                correct: final_shd == 0,
                initial_shd,
                samples_to_shd0,
                error: None,
            })
        }
        Algorithm::RandomBaseline => {
            let mut rng = trial_rng(cfg.seed, trial, 2);
            let mut b = RandomBaseline::new(&inst.cpdag, &inst.family, inst.net.card())?;
            let mut shds = Vec::with_capacity(cfg.max_samples as usize);
            let mut records = Vec::new();
            for t in 1..=cfg.max_samples {
                let round = b.step(&mut env, &mut rng)?;
                let s = shd(&round.estimate, truth)?;
                shds.push((t, s));
                if keep(t, t == cfg.max_samples) {
                    records.push(TrialRecord {
                        trial,
                        t,
                        samples: t,
                        arm: round.intervention.label(names),
                        d_t: None,
                        shd: s,
                        terminated: false,
                    });
                }
            }
            let final_shd = shds.last().map_or(initial_shd, |&(_, s)| s);
            Ok(TrialOutcome {
                trial,
                records,
                samples_used: cfg.max_samples,
                terminated: false,
                correct: final_shd == 0,
                initial_shd,
                samples_to_shd0: first_zero_run(shds.into_iter(), initial_shd),
                error: None,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkReport {
    pub outcomes: Vec<TrialOutcome>,
    pub summary: Value,
}

/// Runs all trials in parallel. A failing or panicking trial is reported in
/// the summary and does not stop the others.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(
            |trial| match catch_unwind(AssertUnwindSafe(|| run_trial(cfg, trial))) {
                Ok(Ok(o)) => o,
                Ok(Err(e)) => TrialOutcome::failed(trial, e.to_string()),
                Err(p) => {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".into());
                    TrialOutcome::failed(trial, format!("panicked: {msg}"))
                }
            },
        )
        .collect();
    for o in &outcomes {
        if let Some(e) = &o.error {
            log::error!("trial {} failed: {e}", o.trial);
        }
    }
    let summary = summarize(cfg, &outcomes);
    Ok(BenchmarkReport { outcomes, summary })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// SHD of an outcome after `x` samples; the last value carries forward.
fn shd_at(o: &TrialOutcome, x: u64) -> usize {
    match o.records.partition_point(|r| r.samples <= x) {
        0 => o.initial_shd,
        i => o.records[i - 1].shd,
    }
}

/// Mean and two-standard-deviation band of SHD over trials at every
/// multiple of the stride, plus termination and accuracy counts.
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Value {
    let ok: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.error.is_none()).collect();
    let horizon = ok.iter().map(|o| o.samples_used).max().unwrap_or(0);
    let mut curve = Vec::new();
    let mut x = 0;
    while !ok.is_empty() {
        let shds: Vec<f64> = ok.iter().map(|o| shd_at(o, x) as f64).collect();
        let (mean, std) = mean_std(&shds);
        curve.push(json!({ "samples": x, "mean": mean, "lower": mean - 2.0 * std, "upper": mean + 2.0 * std }));
        if x >= horizon {
            break;
        }
        x = (x + cfg.stride).min(horizon);
    }
    let terminated = ok.iter().filter(|o| o.terminated).count();
    let correct = ok.iter().filter(|o| o.terminated && o.correct).count();
    let stopping: Vec<f64> = ok
        .iter()
        .filter(|o| o.terminated)
        .map(|o| o.samples_used as f64)
        .collect();
    let reached: Vec<f64> = ok
        .iter()
        .map(|o| o.samples_to_shd0.unwrap_or(cfg.max_samples) as f64)
        .collect();
    let censored = ok.iter().filter(|o| o.samples_to_shd0.is_none()).count();
    let errors: Vec<Value> = outcomes
        .iter()
        .filter_map(|o| {
            o.error
                .as_ref()
                .map(|e| json!({ "trial": o.trial, "error": e }))
        })
        .collect();
    json!({
        "config": cfg,
        "trials": outcomes.len(),
        "completed": ok.len(),
        "terminated": terminated,
        "terminated_correct": correct,
        "terminated_wrong": terminated - correct,
        "mean_stopping_time": if stopping.is_empty() { Value::Null } else { json!(mean_std(&stopping).0) },
        "samples_to_shd0": {
            "mean": if reached.is_empty() { Value::Null } else { json!(mean_std(&reached).0) },
            "censored": censored,
        },
        "curve": curve,
        "errors": errors,
    })
}

/// Writes trace rows as CSV under a versioned header comment.
pub fn write_csv<W: Write>(outcomes: &[TrialOutcome], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    writeln!(w, "trial,t,samples,arm,d_t,shd,terminated")?;
    for o in outcomes {
        for r in &o.records {
            let d = r.d_t.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.trial, r.t, r.samples, r.arm, d, r.shd, r.terminated
            )?;
        }
    }
    Ok(())
}
