use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use entdim_core::entropy::{entropy_profile, Mode, SampleConfig};
use entdim_core::estimator::{partition_dim_estimate, Candidate, DimConfig};
use entdim_core::schedule::{paper_schedule, toy_schedule, validate_conditions, xi_of, InsertionPlan, Schedule, Tau};
use entdim_core::seqdim::{default_window, estimate_dims};
use entdim_core::tower::build_with_xi;
use entdim_core::{ratio, Error, DEFAULT_BUDGET, SCHEMA_VERSION};
use serde_json::json;

mod specs;
mod verify;

#[derive(Parser)]
#[command(name = "entdim", version, about = "Cutting-and-stacking towers and entropy dimension")]
struct Cli {
    /// Threads for sampling (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sample,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate and validate a parameter schedule.
    Schedule {
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Explicit insertions `n:l,n:l,..` (paper) or `n:l[:h*],..` (toy).
        #[arg(long)]
        insertions: Option<String>,
        /// Toy schedule: `e=2,2 r=1,2`.
        #[arg(long, num_args = 1..=2, value_names = ["e=..", "r=.."])]
        toy: Option<Vec<String>>,
        #[arg(long, default_value = "schedule.json")]
        out: PathBuf,
    },
    /// Build the tower ladder of a schedule.
    Build {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Include name tables (refused above the budget).
        #[arg(long)]
        dump_names: bool,
        /// Base measure to start from instead of the schedule's xi.
        #[arg(long)]
        xi: Option<String>,
        #[arg(long, default_value = "ladder.json")]
        out: PathBuf,
    },
    /// Entropy profile along a sequence, as CSV.
    Entropy {
        /// `<ladder.json>[@<stage>]`.
        #[arg(long)]
        tower: String,
        #[arg(long)]
        partition: String,
        #[arg(long)]
        seq: String,
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
    /// Run verification suites; exit 5 on any failed check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Use this schedule instead of the built-in toys.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "verify.json")]
        out: PathBuf,
    },
    /// Sequence dimension, or partition entropy dimension with `--partition`.
    Dims {
        /// Sequence spec; repeat for several candidates.
        #[arg(long)]
        seq: Vec<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tower: Option<String>,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        #[arg(long, default_value = "dims.json")]
        out: PathBuf,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::ScheduleDegeneracy { .. }) => 2,
            Failure::Core(Error::SpacerPoolOverdrawn { .. }) => 3,
            Failure::Core(Error::TowerTooShallow { .. }) => 4,
            Failure::Verify(_) => 5,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Verify(m) => m.clone(),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn budget() -> Res<u64> {
    match std::env::var("ENTDIM_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("ENTDIM_BUDGET is not an integer: {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn mode(m: ModeArg, samples: u64, seed: Option<u64>, workers: Option<usize>) -> Res<Mode> {
    Ok(match m {
        ModeArg::Exact => Mode::Exact { budget: budget()? },
        ModeArg::Sample => {
            let seed = seed.ok_or_else(|| Failure::Usage("--seed is required in sample mode".into()))?;
            let cfg = SampleConfig::new(samples, seed);
            Mode::Sample(workers.map_or(cfg, |w| cfg.with_workers(w)))
        }
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Res<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Res<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Failure::Usage(format!("bad {what} {x:?}"))))
        .collect()
}

fn cmd_schedule(tau: Option<String>, depth: usize, insertions: Option<String>, toy: Option<Vec<String>>, out: &Path) -> Res<()> {
    let tau = tau.as_deref().map(Tau::parse).transpose()?;
    let s: Schedule = match toy {
        Some(args) => {
            let (mut e, mut r) = (None, None);
            for a in &args {
                match a.split_once('=') {
                    Some(("e", v)) => e = Some(list::<u64>(v, "e")?),
                    Some(("r", v)) => r = Some(list::<u64>(v, "r")?),
                    _ => return Err(Failure::Usage(format!("toy argument {a:?} is not e=.. or r=.."))),
                }
            }
            let e = e.ok_or_else(|| Failure::Usage("toy schedule needs e=..".into()))?;
            let r = r.unwrap_or_else(|| vec![1; e.len()]);
            let mut ins = Vec::new();
            for item in insertions.iter().flat_map(|s| s.split(',')) {
                let f: Vec<u64> = item.split(':').map(|x| x.parse().map_err(|_| Failure::Usage(format!("bad insertion {item:?}")))).collect::<Res<_>>()?;
                match f.as_slice() {
                    [n, l] => ins.push((*n as usize, *l as usize, None)),
                    [n, l, h] => ins.push((*n as usize, *l as usize, Some(*h))),
                    _ => return Err(Failure::Usage(format!("bad insertion {item:?}"))),
                }
            }
            toy_schedule(&e, &r, &ins, Some(budget()?))?
        }
        None => {
            let tau = tau.ok_or_else(|| Failure::Usage("--tau or --toy is required".into()))?;
            let plan = match insertions {
                None => InsertionPlan::Default,
                Some(spec) => {
                    let mut pairs = Vec::new();
                    for item in spec.split(',') {
                        let (n, l) = item.split_once(':').ok_or_else(|| Failure::Usage(format!("bad insertion {item:?}")))?;
                        let p = |x: &str| x.parse::<usize>().map_err(|_| Failure::Usage(format!("bad insertion {item:?}")));
                        pairs.push((p(n)?, p(l)?));
                    }
                    InsertionPlan::Explicit(pairs)
                }
            };
            paper_schedule(tau, plan, depth)?
        }
    };
    let validation = match tau.or_else(|| s.tau()) {
        Some(t) => Some(validate_conditions(&s, Some(t))?),
        None => None,
    };
    fs::write(out, s.to_json()? + "\n")?;
    let xi = xi_of(&s);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "schedule": out.display().to_string(),
        "c_tau": s.tau().map(|t| t.c_tau()),
        "xi": ratio::to_string(&xi.xi),
        "xi_tail_bound": ratio::to_string(&xi.tail_bound),
        "validation": validation,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_build(schedule: &Path, depth: Option<usize>, dump_names: bool, xi: Option<String>, out: &Path) -> Res<()> {
    let s = specs::load_schedule(schedule)?;
    let depth = depth.unwrap_or(s.depth());
    let xi = match xi {
        Some(x) => ratio::parse(&x)?,
        None => s.xi.clone(),
    };
    let l = build_with_xi(&s, depth, &xi)?;
    let budget = budget()?;
    if dump_names {
        if let Some(t) = l.towers.iter().find(|t| !t.cells_u64().is_some_and(|c| c <= budget)) {
            return Err(Error::EnumerationInfeasible {
                what: "name dump",
                size: format!("2^{} x {} at {}", t.col_log2, t.height, t.label),
                budget,
            }
            .into());
        }
    }
    let doc = l.to_doc(dump_names.then_some(budget))?;
    write_json(out, &doc)?;
    for t in &doc.towers {
        println!("{:<5} height {:<12} columns 2^{:<8} measure {}", t.stage, t.height, t.column_count_log2, t.measure);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_entropy(tower: &str, partition: &str, seq: &str, nmax: usize, m: Mode, out: &Path) -> Res<()> {
    let (ladder, idx) = specs::load_tower(tower)?;
    let part = specs::parse_partition(partition, &ladder, budget()?)?;
    let s = specs::parse_seq(seq, nmax)?;
    let offsets: Vec<u64> = s.offsets.iter().copied().take(nmax).collect();
    let profile = entropy_profile(&ladder, idx, &part, &offsets, nmax, m, &s.label)?;
    fs::write(out, profile.to_csv()?)?;
    if let Some(p) = profile.points.last() {
        println!("n = {}, H_n = {:.6} bits, H_n/n = {:.6}", p.n, p.h, p.h_per_n);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dims(
    seqs: &[String],
    nmax: Option<usize>,
    window: Option<usize>,
    tower: Option<String>,
    partition: Option<String>,
    m: impl FnOnce() -> Res<Mode>,
    threshold: f64,
    out: &Path,
) -> Res<()> {
    let report = match (tower, partition) {
        (Some(tower), Some(partition)) => {
            let (ladder, idx) = specs::load_tower(&tower)?;
            let part = specs::parse_partition(&partition, &ladder, budget()?)?;
            let h = ladder.towers[idx].height;
            let n = nmax.unwrap_or(64);
            let specs_in: Vec<String> = if seqs.is_empty() { vec!["nat".into(), "squares".into()] } else { seqs.to_vec() };
            let mut candidates = Vec::new();
            for spec in &specs_in {
                let s = specs::parse_seq(spec, n.max(20))?;
                let offsets: Vec<u64> = s.offsets.iter().copied().filter(|&x| x < h).take(n).collect();
                candidates.push(Candidate { name: s.label, seq: s.seq, offsets, symbolic: s.symbolic });
            }
            let cfg = DimConfig { mode: m()?, threshold, seq_n_max: None };
            serde_json::to_value(partition_dim_estimate(&ladder, idx, &part, &candidates, &cfg)?)?
        }
        (None, None) => {
            let [spec] = seqs else {
                return Err(Failure::Usage("dims needs exactly one --seq (or --tower with --partition)".into()));
            };
            let mut s = specs::parse_seq(spec, nmax.unwrap_or(0))?;
            match (nmax, &s.symbolic) {
                (None, Some(sym)) => json!({ "schema_version": SCHEMA_VERSION, "seq": spec, "symbolic": sym }),
                (None, None) => return Err(Failure::Usage("--nmax is required".into())),
                (Some(n), _) => {
                    let d = estimate_dims(&mut s.seq, n, window.unwrap_or(default_window(n)))?;
                    json!({ "schema_version": SCHEMA_VERSION, "seq": spec, "n_max": d.n_max, "window": d.window, "lower": d.lower, "upper": d.upper })
                }
            }
        }
        _ => return Err(Failure::Usage("--tower and --partition go together".into())),
    };
    write_json(out, &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let workers = cli.workers;
    match cli.cmd {
        Cmd::Schedule { tau, depth, insertions, toy, out } => cmd_schedule(tau, depth, insertions, toy, &out),
        Cmd::Build { schedule, depth, dump_names, xi, out } => cmd_build(&schedule, depth, dump_names, xi, &out),
        Cmd::Entropy { tower, partition, seq, nmax, mode: m, samples, seed, out } => {
            cmd_entropy(&tower, &partition, &seq, nmax, mode(m, samples, seed, workers)?, &out)
        }
        Cmd::Verify { suite, schedule, depth, partition, samples, seed, out } => {
            let schedule = match schedule {
                Some(p) => {
                    let s = specs::load_schedule(&p)?;
                    let d = depth.unwrap_or(s.depth());
                    Some((s, d))
                }
                None => None,
            };
            let ctx = verify::Ctx { schedule, partition, samples, seed, workers, budget: budget()? };
            let report = verify::run(&suite, &ctx)?;
            write_json(&out, &report)?;
            let mut failed = Vec::new();
            for s in &report.suites {
                println!("{:<13} {}", s.suite, if s.pass { "pass" } else { "FAIL" });
                for c in s.checks.iter().filter(|c| !c.pass) {
                    failed.push(format!("{}: {}: {}", s.suite, c.name, c.detail));
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verify(failed.join("\n")))
            }
        }
        Cmd::Dims { seq, nmax, window, tower, partition, mode: m, samples, seed, threshold, out } => {
            cmd_dims(&seq, nmax, window, tower, partition, || mode(m, samples, seed, workers), threshold, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("entdim: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
