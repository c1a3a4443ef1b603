use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tscd::graph::write_edge_list;
use tscd::harness::{
    run_benchmark, trial_rng, write_csv, Algorithm, ExperimentConfig, Instance, RandomBaseline,
};
use tscd::net::{parse_bif, write_bif};
use tscd::tracker::{run, Mode, NetEnv, RunConfig};
use tscd::{shd, Error};

#[derive(Parser)]
#[command(
    name = "tscd",
    version,
    about = "Track-and-stop causal discovery over discrete networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a random network, its CPDAG and a target family.
    Generate {
        #[command(flatten)]
        opts: Opts,
    },
    /// Run one discovery and print the result as JSON.
    Run {
        #[command(flatten)]
        opts: Opts,
        /// Include the per-round trace in the JSON result.
        #[arg(long)]
        trace: bool,
        /// Write the candidate interventional distributions as JSON.
        #[arg(long, value_name = "PATH")]
        candidates: Option<PathBuf>,
    },
    /// Run a batch of trials and write a CSV trace plus a JSON summary.
    Benchmark {
        #[command(flatten)]
        opts: Opts,
        /// Keep every n-th trace row.
        #[arg(long)]
        stride: Option<u64>,
        /// Summary path; defaults to the CSV path with a .json extension.
        #[arg(long, value_name = "PATH")]
        summary: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Exact,
    Practical,
    RandomBaseline,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Exact => Algorithm::Exact,
            AlgoArg::Practical => Algorithm::Practical,
            AlgoArg::RandomBaseline => Algorithm::RandomBaseline,
        }
    }
}

#[derive(Args)]
struct Opts {
    /// JSON experiment config; flags override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// States per variable.
    #[arg(long)]
    card: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_samples: Option<u64>,
    /// Largest target set of generated families.
    #[arg(long)]
    target_bound: Option<usize>,
    /// Target family as JSON: {"sets": [["V1"], ["V2", "V3"]]}.
    #[arg(long, value_name = "PATH")]
    targets: Option<PathBuf>,
    /// Use this network instead of a random one.
    #[arg(long, value_name = "PATH")]
    bif: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$f = v; })*};
        }
        set!(nodes, rho, card, delta, trials, seed, max_samples);
        if let Some(a) = self.algo {
            cfg.algorithm = a.into();
        }
        if self.target_bound.is_some() {
            cfg.target_bound = self.target_bound;
        }
        for (dst, src) in [
            (&mut cfg.targets, &self.targets),
            (&mut cfg.bif, &self.bif),
            (&mut cfg.out, &self.out),
        ] {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(io_err(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_text(p, text),
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(io_err(Path::new("<stdout>"))(e))
            }
            _ => Ok(()),
        },
    }
}

fn instance(cfg: &ExperimentConfig) -> Result<Instance, Error> {
    match &cfg.bif {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            Instance::from_net(parse_bif(&text)?, cfg.targets.as_deref(), cfg.target_bound)
        }
        None => Instance::random(cfg, &mut trial_rng(cfg.seed, 0, 0)),
    }
}

fn generate(cfg: &ExperimentConfig) -> Result<(), Error> {
    let inst = instance(cfg)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_text(&dir.join("net.bif"), &write_bif(&inst.net))?;
    write_text(&dir.join("dag.txt"), &write_edge_list(inst.net.graph()))?;
    write_text(&dir.join("cpdag.txt"), &write_edge_list(&inst.cpdag))?;
    write_text(&dir.join("targets.json"), &inst.family.to_json(&inst.cpdag))?;
    log::info!("wrote instance to {}", dir.display());
    Ok(())
}

fn run_one(cfg: &ExperimentConfig, trace: bool, candidates: Option<&Path>) -> Result<(), Error> {
    let inst = instance(cfg)?;
    let truth = inst.net.graph();
    let mut env = NetEnv {
        net: &inst.net,
        rng: trial_rng(cfg.seed, 0, 1),
    };
    let mut value = match cfg.algorithm {
        Algorithm::Exact | Algorithm::Practical => {
            let mode = if cfg.algorithm == Algorithm::Exact {
                Mode::Exact
            } else {
                Mode::Practical
            };
            let hyp = inst.hypotheses(mode)?;
            if let Some(p) = candidates {
                let sets: Vec<_> = hyp.targets.iter().map(|t| t.to_json(&inst.cpdag)).collect();
                write_text(p, &serde_json::to_string_pretty(&sets)?)?;
            }
            let mut rc = RunConfig::new(cfg.delta, cfg.max_samples);
            rc.trace = trace;
            rc.truth = trace.then(|| truth.clone());
            let res = run(&hyp, &mut env, &rc)?;
            let mut v = res.to_json(&hyp);
            v["shd"] = json!(shd(&res.estimate, truth)?);
            v
        }
        Algorithm::RandomBaseline => {
            let mut rng = trial_rng(cfg.seed, 0, 2);
            let mut baseline = RandomBaseline::new(&inst.cpdag, &inst.family, inst.net.card())?;
            for _ in 0..cfg.max_samples {
                baseline.step(&mut env, &mut rng)?;
            }
            let estimate = baseline.estimate;
            json!({
                "mode": "random-baseline",
                "samples": cfg.max_samples,
                "estimate": estimate.to_string(),
                "shd": shd(&estimate, truth)?,
            })
        }
    };
    value["truth"] = json!(truth.to_string());
    emit(cfg.out.as_deref(), &serde_json::to_string_pretty(&value)?)
}

fn benchmark(cfg: &ExperimentConfig, summary: Option<PathBuf>) -> Result<(), Error> {
    let report = run_benchmark(cfg)?;
    let summary_text = serde_json::to_string_pretty(&report.summary)?;
    match &cfg.out {
        Some(p) => {
            let file = fs::File::create(p).map_err(io_err(p))?;
            let mut w = BufWriter::new(file);
            write_csv(&report.outcomes, &mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(p))?;
            let sp = summary.unwrap_or_else(|| p.with_extension("json"));
            write_text(&sp, &summary_text)?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_csv(&report.outcomes, &mut w).map_err(io_err(Path::new("<stdout>")))?;
            match summary {
                Some(sp) => write_text(&sp, &summary_text)?,
                None => eprintln!("{summary_text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { opts } => opts.config().and_then(|c| generate(&c)),
        Command::Run {
            opts,
            trace,
            candidates,
        } => opts
            .config()
            .and_then(|c| run_one(&c, trace, candidates.as_deref())),
        Command::Benchmark {
            opts,
            stride,
            summary,
        } => opts.config().and_then(|mut c| {
            if let Some(s) = stride {
                c.stride = s;
            }
            c.validate()?;
            benchmark(&c, summary)
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
