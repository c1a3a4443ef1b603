//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tscd::effects::{
    blocking_path, candidate_distributions, enumerate_cut_configs, identify_effect,
};
use tscd::graph::{apply_meek_rules, cpdag_of, enumerate_mec};
use tscd::harness::{
    random_chordal_dag, random_cpts, run_benchmark, trial_rng, write_csv, Algorithm,
    ExperimentConfig, Instance,
};
use tscd::separating::{cuts_all_edges, graph_separating_system, nk_separating_system};
use tscd::tracker::{
    run_observed, AdaHedge, Hypotheses, HypothesisOptions, Mode, NetEnv, RunConfig, Status,
};
use tscd::{DiscreteNet, Factor, GraphKind, Intervention, MixedGraph};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("V{i}")).collect()
}

/// DAG over a random order with each forward pair joined with probability p.
fn random_dag(n: usize, p: f64, rng: &mut ChaCha8Rng) -> MixedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = MixedGraph::new(names(n), GraphKind::Dag);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_directed(order[i], order[j]).unwrap();
            }
        }
    }
    g
}

fn digits(mut idx: usize, card: &[usize]) -> Vec<usize> {
    let mut out = vec![0; card.len()];
    for v in (0..card.len()).rev() {
        out[v] = idx % card[v];
        idx /= card[v];
    }
    out
}

fn flat(assign: &[usize], card: &[usize]) -> usize {
    assign.iter().zip(card).fold(0, |acc, (&a, &c)| acc * c + a)
}

/// P(v = x | parents) read straight from the table layout.
fn cpt_entry(net: &DiscreteNet, v: usize, full: &[usize]) -> f64 {
    let cpt = net.cpt(v);
    let card = net.card();
    let row = cpt
        .parents
        .iter()
        .fold(0, |acc, &p| acc * card[p] + full[p]);
    cpt.table[row * card[v] + full[v]]
}

/// Truncated factorization by brute-force enumeration, marginalized to `y`.
fn truncated_marginal(net: &DiscreteNet, iv: &Intervention, y: &[usize]) -> Vec<f64> {
    let card = net.card();
    let n = card.len();
    let cells: usize = card.iter().product();
    let ycard: Vec<usize> = y.iter().map(|&v| card[v]).collect();
    let mut out = vec![0.0; ycard.iter().product()];
    for idx in 0..cells {
        let full = digits(idx, card);
        if iv
            .targets()
            .iter()
            .zip(iv.values())
            .any(|(&t, &x)| full[t] != x)
        {
            continue;
        }
        let mut p = 1.0;
        for v in 0..n {
            if iv.value_of(v).is_none() {
                p *= cpt_entry(net, v, &full);
            }
        }
        let ya: Vec<usize> = y.iter().map(|&v| full[v]).collect();
        out[flat(&ya, &ycard)] += p;
    }
    out
}

/// Network over `dag` whose conditionals are read off the joint `obs`.
fn fit_net(dag: &MixedGraph, obs: &Factor) -> DiscreteNet {
    let card = obs.card().to_vec();
    let n = card.len();
    let tables = (0..n)
        .map(|v| {
            let parents = dag.parents(v);
            let mut fam = parents.clone();
            fam.push(v);
            fam.sort_unstable();
            let joint = obs.marginal(&fam);
            let pmarg = obs.marginal(&parents);
            let rows: usize = parents.iter().map(|&p| card[p]).product();
            let mut table = Vec::with_capacity(rows * card[v]);
            for r in 0..rows {
                let pa = digits(r, &parents.iter().map(|&p| card[p]).collect::<Vec<_>>());
                let mut full = vec![0; n];
                for (&p, &x) in parents.iter().zip(&pa) {
                    full[p] = x;
                }
                let denom = pmarg.get_full(&full);
                for x in 0..card[v] {
                    full[v] = x;
                    table.push(joint.get_full(&full) / denom);
                }
            }
            table
        })
        .collect();
    DiscreteNet::new(dag.clone(), card, tables).unwrap()
}

fn kl_vec(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

fn random_subset(pool: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = pool.to_vec();
    v.shuffle(rng);
    v.truncate(k);
    v.sort_unstable();
    v
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=6);
        let dag = random_dag(n, rng.random_range(0.3..0.8), &mut rng);
        let net = random_cpts(&dag, &vec![2; n], &mut rng).unwrap();
        let obs = net.joint().unwrap();
        let cpdag = cpdag_of(&dag).unwrap();
        let mut m = cpdag.clone();
        for (a, b) in cpdag.undirected_edges() {
            if rng.random_bool(0.4) {
                if dag.has_arrow(a, b) {
                    m.orient(a, b);
                } else {
                    m.orient(b, a);
                }
            }
        }
        let m = apply_meek_rules(&m).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let kx = rng.random_range(1..=2.min(n - 1));
        let x = random_subset(&all, kx, &mut rng);
        let rest: Vec<usize> = all.iter().copied().filter(|v| !x.contains(v)).collect();
        let ky = rng.random_range(1..=rest.len());
        let y = random_subset(&rest, ky, &mut rng);
        let iv = Intervention::new(x.iter().map(|&v| (v, rng.random_range(0..2)))).unwrap();
        if blocking_path(&m, &x, &y).is_some() {
            skipped += 1;
            continue;
        }
        let got = identify_effect(&m, &iv, &y, &obs).unwrap();
        let want = truncated_marginal(&net, &iv, &y);
        let err = got
            .values()
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err > 1e-9 {
            failures += 1;
        }
        checked += 1;
    }
    verdict(
        failures == 0 && checked >= 50,
        format!("{checked} identifiable triples checked ({skipped} not identifiable), max error {worst:.2e}"),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut min_sep = f64::INFINITY;
    let mut targets = 0;
    let mut bad = 0;
    for i in 0..50 {
        let n = rng.random_range(3..=6);
        let dag = random_chordal_dag(n, rng.random_range(0.2..=1.0), &mut rng).unwrap();
        let net = random_cpts(&dag, &vec![2; n], &mut rng).unwrap();
        let obs = net.joint().unwrap();
        let cpdag = cpdag_of(&dag).unwrap();
        let family =
            graph_separating_system(&cpdag, if i % 2 == 0 { Some(1) } else { None }).unwrap();
        for s in &family.sets {
            let set = candidate_distributions(&cpdag, s, &obs).unwrap();
            targets += 1;
            if let Some((_, _, d)) = set.closest_pair() {
                min_sep = min_sep.min(d);
                if d <= 1e-9 {
                    bad += 1;
                }
            }
        }
    }
    verdict(
        bad == 0 && targets > 0,
        format!("{targets} targets, smallest pairwise L1 separation {min_sep:.3e}"),
    )
}

fn criterion_3() -> Verdict {
    // Complete graph on V1..V4 without V1 - V3.
    let cpdag = MixedGraph::from_edges(
        names(4),
        [],
        [(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)],
        GraphKind::Cpdag,
    )
    .unwrap();
    let dag = MixedGraph::from_edges(
        names(4),
        [(0, 1), (0, 3), (1, 3), (1, 2), (3, 2)],
        [],
        GraphKind::Dag,
    )
    .unwrap();
    let net = random_cpts(&dag, &[2; 4], &mut ChaCha8Rng::seed_from_u64(303)).unwrap();
    let obs = net.joint().unwrap();
    let p = |a: [Option<usize>; 4]| -> f64 {
        (0..16)
            .map(|i| digits(i, &[2; 4]))
            .filter(|d| (0..4).all(|v| a[v].is_none_or(|x| x == d[v])))
            .map(|d| obs.get_full(&d))
            .sum()
    };
    let configs = enumerate_cut_configs(&cpdag, &[0]).unwrap();
    let set = candidate_distributions(&cpdag, &[0], &obs).unwrap();
    if configs.len() != 4 || set.configs.len() != 4 || set.outcome_scope() != [1, 2, 3] {
        return verdict(false, format!("{} cut configurations", configs.len()));
    }
    let mut worst: f64 = 0.0;
    let mut seen = [false; 4];
    for (c, cfg) in set.configs.iter().enumerate() {
        let out_12 = cfg.arrows.contains(&(0, 1));
        let out_14 = cfg.arrows.contains(&(0, 3));
        let case = match (out_12, out_14) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        };
        seen[case] = true;
        for (r, iv) in set.realizations.iter().enumerate() {
            let v1 = Some(iv.values()[0]);
            for (i, &got) in set.factors[c][r].values().iter().enumerate() {
                let d = digits(i, &[2; 3]);
                let (v2, v3, v4) = (Some(d[0]), Some(d[1]), Some(d[2]));
                let p3_24 = p([None, v2, v3, v4]) / p([None, v2, None, v4]);
                let want = match case {
                    0 => p([None, v2, v3, v4]),
                    1 => {
                        p([None, None, None, v4]) * p3_24 * p([v1, v2, None, v4])
                            / p([v1, None, None, v4])
                    }
                    2 => {
                        p([v1, v2, None, v4]) / p([v1, v2, None, None])
                            * p3_24
                            * p([None, v2, None, None])
                    }
                    _ => p3_24 * p([v1, v2, None, v4]) / p([v1, None, None, None]),
                };
                worst = worst.max((got - want).abs());
            }
        }
    }
    verdict(
        seen.iter().all(|&s| s) && worst <= 1e-9,
        format!("4 configurations, cases (a)-(d) all present, max error {worst:.2e}"),
    )
}

struct SoundnessRun {
    terminated: bool,
    wrong: bool,
    violations: u64,
    rounds: u64,
}

fn soundness_runs() -> (Vec<SoundnessRun>, Duration) {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        nodes: 4,
        delta: 0.2,
        trials: 200,
        seed: 404,
        max_samples: 200_000,
        ..Default::default()
    };
    let runs = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let inst = Instance::for_trial(&cfg, trial).unwrap();
            let hyp = inst.hypotheses(Mode::Practical).unwrap();
            let k = hyp.n_arms();
            let mut env = NetEnv {
                net: &inst.net,
                rng: trial_rng(cfg.seed, trial, 1),
            };
            let mut violations = 0;
            let mut rounds = 0;
            let rc = RunConfig::new(cfg.delta, cfg.max_samples);
            let res = run_observed(&hyp, &mut env, &rc, &mut |st| {
                rounds += 1;
                if (st.t as usize) < k {
                    return;
                }
                let root = (st.t as f64).sqrt();
                let kk = k as f64;
                for (&n, &a) in st.counts.iter().zip(&st.alloc_sum) {
                    let n = n as f64;
                    if n < a - (kk - 1.0) * (root + 2.0) || n > (1.0 + a).max(root + 1.0) {
                        violations += 1;
                    }
                    if n < root.floor() - kk {
                        violations += 1;
                    }
                }
            })
            .unwrap();
            let terminated = res.status == Status::Terminated;
            SoundnessRun {
                terminated,
                wrong: terminated && res.estimate != *inst.net.graph(),
                violations,
                rounds,
            }
        })
        .collect();
    (runs, start.elapsed())
}

fn criterion_4(runs: &[SoundnessRun], elapsed: Duration) -> Verdict {
    let trials = runs.len() as f64;
    let terminated = runs.iter().filter(|r| r.terminated).count();
    let wrong = runs.iter().filter(|r| r.wrong).count();
    let limit = 0.2 + 3.0 * (0.2f64 * 0.8 / trials).sqrt();
    let wrong_ok = wrong as f64 / trials <= limit;
    let term_ok = terminated as f64 / trials >= 0.95;
    verdict(
        wrong_ok && term_ok && elapsed <= Duration::from_secs(20 * 60),
        format!(
            "wrong {wrong}/{} (limit {limit:.3}: {}), terminated {terminated}/{} ({:.1}%, need 95%: {}), {:.0?}",
            runs.len(),
            if wrong_ok { "ok" } else { "exceeded" },
            runs.len(),
            100.0 * terminated as f64 / trials,
            if term_ok { "ok" } else { "short" },
            elapsed
        ),
    )
}

fn criterion_5(runs: &[SoundnessRun]) -> Verdict {
    let violations: u64 = runs.iter().map(|r| r.violations).sum();
    let rounds: u64 = runs.iter().map(|r| r.rounds).sum();
    verdict(
        violations == 0 && rounds > 0,
        format!("{violations} violations over {rounds} rounds"),
    )
}

fn criterion_6() -> Verdict {
    let worst = AtomicU64::new(0f64.to_bits());
    let violations: usize = (0..1000u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(600 + s);
            let k = rng.random_range(2..=16);
            let d: f64 = (rng.random_range(0.1f64..4.0).ln()).exp();
            let horizon = 1000;
            let kind = s % 3;
            let means: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..0.7)).collect();
            let mut hedge = AdaHedge::new(k);
            let mut earned = 0.0;
            for t in 0..horizon {
                let r: Vec<f64> = (0..k)
                    .map(|i| match kind {
                        0 => rng.random_range(0.0..=d),
                        1 => {
                            if rng.random_bool(means[i]) {
                                d
                            } else {
                                0.0
                            }
                        }
                        _ => {
                            let phase = (t / 50) % k;
                            if i == phase {
                                d * rng.random_range(0.5..=1.0)
                            } else {
                                d * rng.random_range(0.0..=0.6)
                            }
                        }
                    })
                    .collect();
                let w = hedge.step(&r).unwrap();
                earned += w.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
            }
            let best = hedge
                .cumulative_rewards()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let regret = best - earned;
            let ln_k = (k as f64).ln();
            let bound = (d * horizon as f64 * ln_k).sqrt() + d * (4.0 / 3.0 * ln_k + 2.0);
            let ratio = regret / bound;
            let mut cur = worst.load(Ordering::Relaxed);
            while f64::from_bits(cur) < ratio {
                match worst.compare_exchange(
                    cur,
                    ratio.to_bits(),
                    Ordering::Relaxed,
                    Ordering::Relaxed,
                ) {
                    Ok(_) => break,
                    Err(c) => cur = c,
                }
            }
            usize::from(regret > bound)
        })
        .sum();
    verdict(
        violations == 0,
        format!(
            "{violations}/1000 streams above the bound, largest regret/bound {:.3}",
            f64::from_bits(worst.load(Ordering::Relaxed))
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut bad = Vec::new();
    for n in 2..=12 {
        for k in 1..=3 {
            let fam = nk_separating_system(n, k).unwrap();
            let separated = (0..n).all(|i| {
                (i + 1..n).all(|j| fam.sets.iter().any(|s| s.contains(&i) != s.contains(&j)))
            });
            let a = n.div_ceil(k).max(2);
            let mut log = 0;
            while a.pow(log) < n {
                log += 1;
            }
            let sized = fam.sets.iter().all(|s| s.len() <= k);
            if !separated || fam.len() > a * log as usize || !sized {
                bad.push(format!("n={n} k={k}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut uncut = 0;
    for i in 0..100 {
        let n = rng.random_range(2..=10);
        let dag = random_chordal_dag(n, rng.random_range(0.1..=1.0), &mut rng).unwrap();
        let cpdag = cpdag_of(&dag).unwrap();
        let k = [None, Some(1), Some(2)][i % 3];
        if !cuts_all_edges(&cpdag, &graph_separating_system(&cpdag, k).unwrap()) {
            uncut += 1;
        }
    }
    verdict(
        bad.is_empty() && uncut == 0,
        format!("nk systems failing for {} of 33 (n, k) pairs {bad:?}, graph systems missing an edge: {uncut}/100", bad.len()),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_gap: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    let mut order_bad = 0;
    for i in 0..20 {
        let (n, und): (usize, Vec<(usize, usize)>) = if i % 2 == 0 {
            (3, vec![(0, 1), (1, 2)])
        } else {
            (4, vec![(0, 1), (0, 2), (0, 3)])
        };
        let cpdag = MixedGraph::from_edges(names(n), [], und, GraphKind::Cpdag).unwrap();
        let members = enumerate_mec(&cpdag).unwrap();
        let truth = members[rng.random_range(0..members.len())].clone();
        let net = random_cpts(&truth, &vec![2; n], &mut rng).unwrap();
        let obs = net.joint().unwrap();
        let family = graph_separating_system(&cpdag, Some(1)).unwrap();
        let hyp = Hypotheses::build(
            &cpdag,
            &obs,
            &family,
            Mode::Exact,
            &HypothesisOptions::default(),
        )
        .unwrap();
        let c = hyp.oracle_complexity(&truth).unwrap();
        let lo = hyp.oracle_complexity_lower(&truth).unwrap();
        worst_gap = worst_gap.max(c.gap());
        if c.value() < lo.value() - 1e-9 {
            order_bad += 1;
        }
        // Payoff rows: one per alternative DAG, entries kl(P^truth_s || P^alt_s).
        let rows: Vec<Vec<f64>> = members
            .iter()
            .filter(|d| **d != truth)
            .map(|alt| {
                let alt_net = fit_net(alt, &obs);
                hyp.arms
                    .iter()
                    .enumerate()
                    .map(|(a, arm)| {
                        let y = hyp.model(a, 0).scope().to_vec();
                        kl_vec(
                            &truncated_marginal(&net, &arm.intervention, &y),
                            &truncated_marginal(&alt_net, &arm.intervention, &y),
                        )
                    })
                    .collect()
            })
            .collect();
        let steps = 1000;
        let mut grid = f64::INFINITY;
        let eval = |y: &[f64]| -> f64 {
            (0..hyp.n_arms())
                .map(|a| y.iter().zip(&rows).map(|(w, r)| w * r[a]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        if rows.len() == 2 {
            for i in 0..=steps {
                let w = i as f64 / steps as f64;
                grid = grid.min(eval(&[w, 1.0 - w]));
            }
        } else {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    grid = grid.min(eval(&[a, b, 1.0 - a - b]));
                }
            }
        }
        worst_grid = worst_grid.max((grid - c.value()).abs());
    }
    verdict(
        worst_gap <= 1e-4 && worst_grid <= 5e-3 && order_bad == 0,
        format!("max duality gap {worst_gap:.2e}, max grid disagreement {worst_grid:.2e}, c < c_lower on {order_bad}/20"),
    )
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let base = ExperimentConfig {
        nodes: 5,
        rho: 1.0,
        delta: 0.1,
        trials: 20,
        seed: 909,
        max_samples: 200_000,
        stride: 1000,
        ..Default::default()
    };
    let mean = |algorithm| {
        let cfg = ExperimentConfig {
            algorithm,
            ..base.clone()
        };
        let report = run_benchmark(&cfg).unwrap();
        let censored = report
            .outcomes
            .iter()
            .filter(|o| o.samples_to_shd0.is_none())
            .count();
        let m = report
            .outcomes
            .iter()
            .map(|o| o.samples_to_shd0.unwrap_or(cfg.max_samples) as f64)
            .sum::<f64>()
            / report.outcomes.len() as f64;
        (m, censored)
    };
    let (tracker, tc) = mean(Algorithm::Practical);
    let (baseline, bc) = mean(Algorithm::RandomBaseline);
    let elapsed = start.elapsed();
    verdict(
        tracker <= 0.8 * baseline && elapsed <= Duration::from_secs(30 * 60),
        format!(
            "mean samples to SHD 0: tracker {tracker:.0} ({tc} censored), baseline {baseline:.0} ({bc} censored), ratio {:.3}, {elapsed:.0?}",
            tracker / baseline
        ),
    )
}

fn criterion_10() -> Verdict {
    let cfg = ExperimentConfig {
        nodes: 4,
        rho: 0.7,
        delta: 0.2,
        trials: 6,
        seed: 1010,
        max_samples: 20_000,
        ..Default::default()
    };
    let csv = |threads: usize| -> Vec<u8> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let report = pool.install(|| run_benchmark(&cfg).unwrap());
        let mut out = Vec::new();
        write_csv(&report.outcomes, &mut out).unwrap();
        out
    };
    let a = csv(4);
    let b = csv(4);
    let c = csv(1);
    verdict(
        a == b && a == c && a.len() > 1000,
        format!(
            "{} bytes, identical across repeat and thread count: {}",
            a.len(),
            a == b && a == c
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, v: Verdict| {
        println!(
            "criterion {id:>2} [{}] {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    };
    report(1, "identification formula", criterion_1());
    report(2, "candidate distinctness", criterion_2());
    report(3, "four-node cut example", criterion_3());
    let (runs, elapsed) = soundness_runs();
    report(4, "soundness and termination", criterion_4(&runs, elapsed));
    report(5, "tracking bounds", criterion_5(&runs));
    report(6, "hedge regret", criterion_6());
    report(7, "separating systems", criterion_7());
    report(8, "oracle complexity", criterion_8());
    report(9, "directional efficiency", criterion_9());
    report(10, "benchmark determinism", criterion_10());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
