use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use ibrs::pairing::{profile_by_id, profiles, CurveProfile, DEFAULT_PROFILE};
use ibrs_bench::{run, BenchKind, Machine, RunConfig, MIN_TRIALS};
use ibrs_sim::{run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "ibrs", version, about = "Benchmarks and simulations for ibrs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time or size the scheme.
    Bench {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Play a scenario file and export its event log.
    Simulate {
        scenario: PathBuf,
        /// Override the scenario's curve.
        #[arg(long, value_parser = parse_profile)]
        curve: Option<&'static CurveProfile>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// JSONL event log [default: <scenario stem>.jsonl]
        #[arg(long)]
        log: Option<PathBuf>,
        /// CSV summary [default: <scenario stem>.csv]
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ops,
    VerifyVsRingsize,
    BatchCurve,
    Sizes,
}

impl From<Kind> for BenchKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Ops => BenchKind::Ops,
            Kind::VerifyVsRingsize => BenchKind::VerifyVsRingsize,
            Kind::BatchCurve => BenchKind::BatchCurve,
            Kind::Sizes => BenchKind::Sizes,
        }
    }
}

#[derive(Args)]
struct BenchOpts {
    /// Curve profile.
    #[arg(long, value_parser = parse_profile, default_value = DEFAULT_PROFILE.id)]
    curve: &'static CurveProfile,
    /// Timed runs per cell.
    #[arg(long, default_value_t = 1000, value_parser = parse_trials)]
    trials: usize,
    /// Discarded runs before timing each cell.
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    /// Ring sizes n' [default: 2..=16 for verify-vs-ringsize, otherwise 2]
    #[arg(long, value_delimiter = ',', value_parser = parse_ring_size)]
    ring_size: Vec<usize>,
    /// Batch sizes η for batch-curve.
    #[arg(long, value_delimiter = ',', default_value = "1,10,50,100,500",
          value_parser = clap::value_parser!(u32).range(1..=100_000))]
    eta_list: Vec<u32>,
    /// Message length in bytes for signed envelopes.
    #[arg(long, default_value_t = 32)]
    message_len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write a gnuplot-ready data file.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    /// Also write the full report, machine descriptor included, as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Pin the measurement thread to this core.
    #[arg(long)]
    pin: Option<usize>,
}

fn parse_profile(s: &str) -> Result<&'static CurveProfile, String> {
    profile_by_id(s).ok_or_else(|| {
        let known: Vec<_> = profiles().iter().map(|p| p.id).collect();
        format!("unknown curve profile (known: {})", known.join(", "))
    })
}

fn parse_trials(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < MIN_TRIALS {
        return Err(format!("at least {MIN_TRIALS} trials are required"));
    }
    Ok(n)
}

fn parse_ring_size(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if !(2..=1024).contains(&n) {
        return Err("ring size must be in 2..=1024".into());
    }
    Ok(n)
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, msg).exit()
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bench(kind: Kind, o: BenchOpts) -> Result<(), String> {
    let kind = BenchKind::from(kind);
    if kind.needs_backend() && !o.curve.runnable {
        usage_error(format!(
            "curve profile {} is size-only; use it with `bench sizes`",
            o.curve.id
        ));
    }
    let pinned = o.pin.and_then(|core| {
        let ok = core_affinity::get_core_ids()
            .and_then(|ids| ids.into_iter().find(|c| c.id == core))
            .is_some_and(core_affinity::set_for_current);
        if !ok {
            eprintln!("warning: could not pin to core {core}, continuing unpinned");
        }
        ok.then_some(core)
    });
    let ring_sizes = match (o.ring_size.is_empty(), kind) {
        (false, _) => o.ring_size,
        (true, BenchKind::VerifyVsRingsize) => (2..=16).collect(),
        (true, _) => vec![2],
    };
    let cfg = RunConfig {
        trials: o.trials,
        warmup: o.warmup,
        seed: o.seed,
        ring_sizes,
        etas: o.eta_list.iter().map(|&e| e as usize).collect(),
        message_len: o.message_len,
    };
    let machine = Machine::detect(pinned);
    eprintln!("# machine: {machine}");
    let report = run(kind, o.curve, &cfg, machine).map_err(|e| e.to_string())?;
    let table = report.table(kind);
    write_or_print(o.csv.as_deref(), &table.to_csv())?;
    if let Some(p) = &o.gnuplot {
        let preamble = format!("curve: {}\nmachine: {}", report.curve, report.machine);
        write_or_print(Some(p), &table.to_gnuplot(&preamble))?;
    }
    if let Some(p) = &o.json {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_or_print(Some(p), &json)?;
    }
    Ok(())
}

fn simulate(
    path: &Path,
    curve: Option<&'static CurveProfile>,
    seed: Option<u64>,
    log: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> Result<(), String> {
    let mut scenario = Scenario::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(c) = curve {
        if !c.runnable {
            usage_error(format!("curve profile {} cannot be simulated", c.id));
        }
        scenario.topology.curve = c.id.to_owned();
    }
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let events = run_scenario(&scenario).map_err(|e| e.to_string())?;
    let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy());
    let log = log.unwrap_or_else(|| PathBuf::from(format!("{stem}.jsonl")));
    let csv = csv.unwrap_or_else(|| PathBuf::from(format!("{stem}.csv")));
    write_or_print(Some(&log), &events.to_jsonl())?;
    write_or_print(Some(&csv), &events.to_csv_summary())?;
    let summary = serde_json::json!({
        "scenario": scenario.name,
        "seed": scenario.seed,
        "curve": scenario.topology.curve,
        "log_sha256": events.hash(),
        "summary": events.summary(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Bench { kind, opts } => bench(kind, opts),
        Command::Simulate {
            scenario,
            curve,
            seed,
            log,
            csv,
        } => simulate(&scenario, curve, seed, log, csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
