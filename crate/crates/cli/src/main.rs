//! Experiment front end for the macwt library: rate regions, ramp
//! schedules, protocol simulation, and leakage audits, all written as
//! deterministic CSV/JSON keyed by an explicit seed.

mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use macwt::channel::{fixtures, ChannelSpec, InputPair};
use macwt::leakage::audit;
use macwt::protocol::{error_rate, plan, run, ProtocolTrace, DEFAULT_BUDGET};
use macwt::regions::{mac_pentagon, secrecy_pentagon, slot_schedule, RatePentagon};
use macwt::Error;

use output::{fmt12, write_atomic};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

/// 0 success, 2 input error, 3 infeasible configuration, 4 budget.
fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => 2,
        CliError::Domain(err) => match err {
            Error::NoPositiveSecrecyRate(_) | Error::InvalidConfig(_) | Error::InvalidSlot(_) => 3,
            Error::BudgetExceeded { .. } | Error::SizeOverflow { .. } => 4,
            _ => 2,
        },
    }
}

#[derive(Parser)]
#[command(
    name = "macwt",
    version,
    about = "Two-user wiretap MAC: regions, schedules, simulation, leakage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChannelArgs {
    /// Fixture name (see `fixtures list`) or path to a channel JSON file
    #[arg(long)]
    channel: String,
    /// Optional JSON file {"p1": [...], "p2": [...]} with input pmfs;
    /// defaults to uniform
    #[arg(long)]
    inputs: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write secrecy/MAC pentagon caps and vertex CSVs
    Region {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Write the keyed-rate ramp schedule with its saturation constants
    Schedule {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Number of slots to tabulate
        #[arg(long)]
        slots: u32,
        /// Keyed-part block length multiplier (n2 = l * n1)
        #[arg(long, default_value_t = 1)]
        l: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run the multi-slot protocol and write per-slot error rates
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Wiretap-part block length
        #[arg(long)]
        n1: usize,
        #[arg(long, default_value_t = 1)]
        l: u64,
        #[arg(long)]
        slots: u32,
        /// Independent protocol runs to pool
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Root seed; trial t runs with seed + t
        #[arg(long)]
        seed: u64,
        /// Enumeration budget (default MACWT_BUDGET or 2^24)
        #[arg(long)]
        budget: Option<u64>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Also write the first trial's full trace as JSON
        #[arg(long)]
        dump_trace: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Write the I(W_l; Z_1..Z_k) audit table for every l <= k
    Leakage {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        n1: usize,
        #[arg(long, default_value_t = 1)]
        l: u64,
        #[arg(long)]
        slots: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
        /// Monte Carlo samples when a cell exceeds the budget
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Built-in channel fixtures
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    /// Print fixture names
    List,
    /// Write every fixture as <name>.json into a directory
    Emit {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Deserialize)]
struct InputsFile {
    p1: Vec<f64>,
    p2: Vec<f64>,
}

fn load_channel(arg: &str) -> Result<ChannelSpec, CliError> {
    if let Some(spec) = fixtures::by_name(arg) {
        return Ok(spec);
    }
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ChannelSpec::load(path)?);
    }
    Err(CliError::Usage(format!(
        "channel '{arg}' is neither a fixture name ({}) nor a readable file",
        fixtures::NAMES.join(", ")
    )))
}

fn load_inputs(spec: &ChannelSpec, path: Option<&Path>) -> Result<InputPair, CliError> {
    let Some(path) = path else {
        return Ok(InputPair::uniform_for(spec));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let file: InputsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let sizes = spec.sizes();
    if file.p1.len() != sizes[0] || file.p2.len() != sizes[1] {
        return Err(CliError::Usage(format!(
            "input pmf lengths ({}, {}) do not match channel alphabets ({}, {})",
            file.p1.len(),
            file.p2.len(),
            sizes[0],
            sizes[1]
        )));
    }
    Ok(InputPair::new(file.p1, file.p2)?)
}

fn resolve_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("MACWT_BUDGET") {
        Ok(s) => s
            .parse()
            .map_err(|_| CliError::Usage(format!("MACWT_BUDGET='{s}' is not a u64"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn channel_label(spec: &ChannelSpec) -> &str {
    spec.name().unwrap_or("custom")
}

fn caps_csv(secrecy: &RatePentagon, mac: &RatePentagon) -> String {
    let mut out = String::from("region,cap1,cap2,cap_sum\n");
    for (label, p) in [("secrecy", secrecy), ("mac", mac)] {
        out.push_str(&format!(
            "{label},{},{},{}\n",
            fmt12(p.cap1),
            fmt12(p.cap2),
            fmt12(p.cap_sum)
        ));
    }
    out
}

fn vertices_csv(p: &RatePentagon) -> String {
    let mut out = String::from("r1,r2\n");
    for (r1, r2) in p.vertices() {
        out.push_str(&format!("{},{}\n", fmt12(r1), fmt12(r2)));
    }
    out
}

fn cmd_region(channel: &ChannelArgs, out: &Path, force: bool) -> Result<(), CliError> {
    let spec = load_channel(&channel.channel)?;
    let inputs = load_inputs(&spec, channel.inputs.as_deref())?;
    let secrecy = secrecy_pentagon(&spec, &inputs)?;
    let mac = mac_pentagon(&spec, &inputs)?;
    write_atomic(&out.join("caps.csv"), caps_csv(&secrecy, &mac).as_bytes(), force)?;
    write_atomic(
        &out.join("secrecy_vertices.csv"),
        vertices_csv(&secrecy).as_bytes(),
        force,
    )?;
    write_atomic(
        &out.join("mac_vertices.csv"),
        vertices_csv(&mac).as_bytes(),
        force,
    )?;
    Ok(())
}

fn cmd_schedule(
    channel: &ChannelArgs,
    slots: u32,
    l: u64,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    if slots < 1 {
        return Err(CliError::Usage("--slots must be at least 1".into()));
    }
    let spec = load_channel(&channel.channel)?;
    let inputs = load_inputs(&spec, channel.inputs.as_deref())?;
    let schedule = slot_schedule(&spec, &inputs, slots, l)?;
    let mut csv = format!(
        "# lambda1={} lambda2={} lambda_star={}\nk,R1,R2,sum,overall_R1,overall_R2\n",
        schedule.lambda1, schedule.lambda2, schedule.lambda_star
    );
    for row in &schedule.per_slot {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.slot,
            fmt12(row.keyed1),
            fmt12(row.keyed2),
            fmt12(row.keyed_sum),
            fmt12(row.overall1),
            fmt12(row.overall2)
        ));
    }
    write_atomic(out, csv.as_bytes(), force)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    channel: &ChannelArgs,
    n1: usize,
    l: u64,
    slots: u32,
    trials: u64,
    seed: u64,
    budget: Option<u64>,
    out: &Path,
    dump_trace: Option<&Path>,
    force: bool,
) -> Result<(), CliError> {
    if trials < 1 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let spec = load_channel(&channel.channel)?;
    let inputs = load_inputs(&spec, channel.inputs.as_deref())?;
    let budget = resolve_budget(budget)?;
    let config = plan(&spec, &inputs, n1, l, slots, seed, budget)?;

    let mut traces: Vec<ProtocolTrace> = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut c = config.clone();
        c.seed = seed.wrapping_add(t);
        traces.push(run(&spec, &inputs, &c)?);
    }
    let estimates = error_rate(&traces)?;

    let mut csv = format!(
        "# channel={} n1={n1} l={l} slots={slots} seed={seed} trials={trials}\n\
         slot,realized_R1,realized_R2,Pe,wilson_lo,wilson_hi\n",
        channel_label(&spec)
    );
    for est in &estimates {
        let rates = traces[0].slots[(est.slot - 1) as usize].realized_rate;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            est.slot,
            fmt12(rates[0]),
            fmt12(rates[1]),
            fmt12(est.pe),
            fmt12(est.wilson_lo),
            fmt12(est.wilson_hi)
        ));
    }
    write_atomic(out, csv.as_bytes(), force)?;

    if let Some(trace_path) = dump_trace {
        let json = serde_json::to_vec_pretty(&traces[0])
            .map_err(|e| CliError::Domain(Error::from(e)))?;
        write_atomic(trace_path, &json, force)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_leakage(
    channel: &ChannelArgs,
    n1: usize,
    l: u64,
    slots: u32,
    seed: u64,
    budget: Option<u64>,
    samples: u64,
    out: &Path,
    force: bool,
) -> Result<(), CliError> {
    let spec = load_channel(&channel.channel)?;
    let inputs = load_inputs(&spec, channel.inputs.as_deref())?;
    let budget = resolve_budget(budget)?;
    let config = plan(&spec, &inputs, n1, l, slots, seed, budget)?;
    let table = audit(&spec, &inputs, &config, samples)?;

    let mut csv = format!(
        "# channel={} n1={n1} l={l} slots={slots} seed={seed} budget={budget} samples={samples}\n\
         l,k,bits,method,enumeration_or_samples,epsilon_hat\n",
        channel_label(&spec)
    );
    for entry in &table {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            entry.l,
            entry.k,
            fmt12(entry.report.bits),
            entry.report.method,
            entry.report.states,
            fmt12(entry.report.epsilon_hat)
        ));
    }
    write_atomic(out, csv.as_bytes(), force)?;
    Ok(())
}

fn cmd_fixtures(action: &FixturesAction) -> Result<(), CliError> {
    match action {
        FixturesAction::List => {
            for name in fixtures::NAMES {
                println!("{name}");
            }
            Ok(())
        }
        FixturesAction::Emit { out, force } => {
            for spec in fixtures::all() {
                let name = spec.name().expect("fixtures are named").to_owned();
                let json = spec.to_json()?;
                write_atomic(&out.join(format!("{name}.json")), json.as_bytes(), *force)?;
            }
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Region { channel, out, force } => cmd_region(channel, out, *force),
        Command::Schedule {
            channel,
            slots,
            l,
            out,
            force,
        } => cmd_schedule(channel, *slots, *l, out, *force),
        Command::Simulate {
            channel,
            n1,
            l,
            slots,
            trials,
            seed,
            budget,
            out,
            dump_trace,
            force,
        } => cmd_simulate(
            channel,
            *n1,
            *l,
            *slots,
            *trials,
            *seed,
            *budget,
            out,
            dump_trace.as_deref(),
            *force,
        ),
        Command::Leakage {
            channel,
            n1,
            l,
            slots,
            seed,
            budget,
            samples,
            out,
            force,
        } => cmd_leakage(channel, *n1, *l, *slots, *seed, *budget, *samples, out, *force),
        Command::Fixtures { action } => cmd_fixtures(action),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
