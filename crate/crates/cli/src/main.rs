mod scenario;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meshflood::metrics::kv_text;
use meshflood::{
    brute_force_min_relays, compare, coverage_check, select_relays_with, InflightPolicy, Mode,
    RunOutput, Summary,
};
use rayon::prelude::*;
use thiserror::Error;

use scenario::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Oracle(_) => 4,
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "meshflood",
    version,
    about = "Relay-optimized broadcast flooding simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario (or a batch of seeds) and write its series and summary.
    Run(RunArgs),
    /// Run relay and blind flooding on the same scenario and report the reduction.
    Compare(CompareArgs),
    /// Compare the greedy relay set with the exhaustive minimum.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Overrides {
    /// Random seed (placement, mobility)
    #[arg(long)]
    seed: Option<u64>,
    /// Forwarding rule that a relay only forwards copies from its selectors
    #[arg(long, value_enum)]
    rule2: Option<OnOff>,
    /// What happens to copies in the air when the topology changes
    #[arg(long)]
    inflight: Option<InflightPolicy>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.config.seed = seed;
        }
        if let Some(r) = self.rule2 {
            s.config.rule2 = matches!(r, OnOff::On);
        }
        if let Some(p) = self.inflight {
            s.config.inflight = p;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write relays.txt with the initial relay assignment
    #[arg(long)]
    dump_relays: bool,
    /// Also write topology.txt with the initial topology
    #[arg(long)]
    dump_topology: bool,
    /// Number of consecutive seeds to run; each goes to <out>/seed-<s>
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Worker threads for batch runs
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct CompareArgs {
    scenario: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = meshflood::relay::DEFAULT_ORACLE_MAX_N)]
    max_n: usize,
    #[arg(long)]
    seed: Option<u64>,
}

fn summary_text(s: &Scenario, summary: &Summary) -> String {
    let mut kv: BTreeMap<String, String> = s.config.to_kv();
    kv.insert(
        "config.fixture".into(),
        s.fixture.clone().unwrap_or_else(|| "none".into()),
    );
    kv.extend(summary.to_kv());
    kv_text(&kv)
}

fn write_run(
    s: &Scenario,
    out: &RunOutput,
    dir: &Path,
    dump_relays: bool,
    dump_topology: bool,
) -> Result<Summary, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join("series.csv");
    out.series
        .export_csv(&csv)
        .map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
    let summary = out.summary();
    let path = dir.join("summary.txt");
    fs::write(&path, summary_text(s, &summary)).map_err(io_err(&path))?;
    if dump_relays {
        let path = dir.join("relays.txt");
        fs::write(&path, out.initial_assignment.to_text()).map_err(io_err(&path))?;
    }
    if dump_topology {
        let path = dir.join("topology.txt");
        fs::write(&path, out.initial_topology.to_text()).map_err(io_err(&path))?;
    }
    if !summary.accounting_ok {
        return Err(CliError::Invariant(format!(
            "{}: sent {} bits, received {} + {} and lost {}",
            dir.display(),
            summary.sent_bits,
            summary.received_bits_first,
            summary.received_bits_dup,
            summary.lost_in_transit_bits
        )));
    }
    Ok(summary)
}

fn report(dir: &Path, s: &Summary) {
    println!(
        "{}: mode={} transmissions={} coverage={:.4} relays={} lost={}",
        dir.display(),
        s.mode,
        s.total_transmissions,
        s.coverage_fraction,
        s.relay_set_size,
        s.lost_in_transit
    );
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut base = Scenario::load(&args.scenario)?;
    args.overrides.apply(&mut base);
    if let Some(m) = args.mode {
        base.config.mode = m;
    }
    if args.runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    let one = |s: &Scenario, dir: &Path| -> Result<Summary, CliError> {
        let out = s.run()?;
        write_run(s, &out, dir, args.dump_relays, args.dump_topology)
    };
    if args.runs == 1 {
        let summary = one(&base, &args.out)?;
        report(&args.out, &summary);
        return Ok(());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let first = base.config.seed;
    let seeds: Vec<u64> = (0..args.runs).map(|i| first.wrapping_add(i)).collect();
    let results: Vec<(PathBuf, Result<Summary, CliError>)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let mut s = base.clone();
                s.config.seed = seed;
                let dir = args.out.join(format!("seed-{seed}"));
                let r = one(&s, &dir);
                (dir, r)
            })
            .collect()
    });
    let mut failure = None;
    for (dir, r) in results {
        match r {
            Ok(summary) => report(&dir, &summary),
            Err(e) => {
                eprintln!("{}: {e}", dir.display());
                failure.get_or_insert(e);
            }
        }
    }
    failure.map_or(Ok(()), Err)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let mut base = Scenario::load(&args.scenario)?;
    args.overrides.apply(&mut base);
    let mut relay = base.clone();
    relay.config.mode = Mode::RelayFlood;
    let mut blind = base;
    blind.config.mode = Mode::BlindFlood;
    let (r, b) = rayon::join(|| relay.run(), || blind.run());
    let (r, b) = (r?, b?);
    let rs = write_run(&relay, &r, &args.out.join("relay"), false, false)?;
    let bs = write_run(&blind, &b, &args.out.join("blind"), false, false)?;
    let red = compare(&rs, &bs).map_err(|e| CliError::Invariant(e.to_string()))?;
    let path = args.out.join("compare.txt");
    let text = red.to_text();
    fs::write(&path, &text).map_err(io_err(&path))?;
    print!("{text}");
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let mut s = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        s.config.seed = seed;
    }
    let t = s.topology()?;
    let optimal =
        brute_force_min_relays(&t, args.max_n).map_err(|e| CliError::Config(e.to_string()))?;
    let heuristic = select_relays_with(&t, s.config.candidate_order).relays;
    let missing = coverage_check(&t, &heuristic);
    if !missing.is_empty() {
        return Err(CliError::Oracle(format!(
            "greedy relay set leaves {} two-hop pairs uncovered, first {:?}",
            missing.len(),
            missing[0]
        )));
    }
    if !coverage_check(&t, &optimal).is_empty() {
        return Err(CliError::Oracle(
            "exhaustive relay set is not a cover".into(),
        ));
    }
    let ratio = if optimal.is_empty() {
        1.0
    } else {
        heuristic.len() as f64 / optimal.len() as f64
    };
    if ratio < 1.0 {
        return Err(CliError::Oracle(format!(
            "greedy set of {} beats the minimum of {}",
            heuristic.len(),
            optimal.len()
        )));
    }
    println!("heuristic={}", heuristic.len());
    println!("optimal={}", optimal.len());
    println!("ratio={ratio:.4}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("meshflood: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
