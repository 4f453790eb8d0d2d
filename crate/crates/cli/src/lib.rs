//! The `depthlab` command line: argument types and one function per
//! subcommand. Each command writes its report to the given writer and
//! returns the process exit status; errors exit with status 2.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use depthlab_core::bits::BitString;
use depthlab_core::complexity::{enumerate_outputs, OutputTable, Witness};
use depthlab_core::config::RunConfig;
use depthlab_core::construction::{run, EventKind, Trace};
use depthlab_core::dyadic::Dyadic;
use depthlab_core::kc::RequestSet;
use depthlab_core::machines::{RosterFile, UniversalMachine};
use depthlab_core::reference::reference_roster;
use depthlab_core::solovay::{ChainSweep, Solovay};
use depthlab_core::verify::verify_run;

/// Exit status of a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status of a run with a failed check or a refused input.
pub const EXIT_FAILED: i32 = 1;
/// Exit status of a command that could not run.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "depthlab", version, about = "Build, trace and check a deep 1-generic construction at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the construction and write its trace, final prefix and requests.
    Construct(ConstructArgs),
    /// Check a trace against its config.
    Verify(VerifyArgs),
    /// Horizon-bounded prefix-free complexity of one string.
    Complexity(ComplexityArgs),
    /// Settling times and the complexity chain of the Solovay sweep.
    Solovay(SolovayArgs),
    /// Compile a request file into a prefix-free machine.
    Kc(KcArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to the config's `max_stage`.
    #[arg(long)]
    pub stages: Option<u64>,
    /// Defaults to `trace.jsonl` under the output directory.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Overrides the config's snapshot length.
    #[arg(long)]
    pub snapshot_len: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to `requests.jsonl` beside the trace.
    #[arg(long)]
    pub requests: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Also write the JSON report to `report.json` here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[arg(long)]
    pub target: BitString,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    /// Longest program enumerated.
    #[arg(long, default_value_t = 15)]
    pub cap: usize,
    /// Roster file; defaults to the built-in reference roster.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    /// Include every output found, with its witness.
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolovayArgs {
    /// Rows for `n < n_max`.
    #[arg(long, default_value_t = 16)]
    pub n_max: u64,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 20)]
    pub cap: usize,
    #[arg(long)]
    pub roster: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct KcArgs {
    #[arg(long)]
    pub requests: PathBuf,
    /// Roster index of the compiled machine; defaults to one past the
    /// reference roster.
    #[arg(long)]
    pub index: Option<u32>,
    /// Steps each table entry costs.
    #[arg(long, default_value_t = 1)]
    pub cost: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Construct(args) => cmd_construct(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Complexity(args) => cmd_complexity(args, out),
        Command::Solovay(args) => cmd_solovay(args, out),
        Command::Kc(args) => cmd_kc(args, out),
    }
}

fn load_roster(path: Option<&Path>) -> Result<UniversalMachine> {
    match path {
        Some(p) => Ok(UniversalMachine::load(p)?),
        None => Ok(reference_roster()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Stage-end `f_s` values shown at the end of the construct summary.
const F_TAIL: usize = 5;

pub fn cmd_construct(args: &ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(len) = args.snapshot_len {
        config.snapshot_len = len;
    }
    let stages = args.stages.unwrap_or(config.max_stage);
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let output = run(&config, stages);

    let trace_path = args
        .trace_out
        .clone()
        .unwrap_or_else(|| args.out_dir.join("trace.jsonl"));
    let mut w = create(&trace_path)?;
    output.trace.write_jsonl(&mut w)?;
    w.flush()?;
    let a_path = args.out_dir.join("final_a.txt");
    let mut a = output.final_a.clone();
    while a.len() < config.snapshot_len {
        a.push(false);
    }
    fs::write(&a_path, format!("{a}\n")).with_context(|| format!("cannot write {}", a_path.display()))?;
    let requests_path = args.out_dir.join("requests.jsonl");
    let mut w = create(&requests_path)?;
    output.requests.write_jsonl(&mut w)?;
    w.flush()?;

    let header = &output.trace.header;
    writeln!(out, "config {}", header.config_hash)?;
    writeln!(out, "tool {} schema {}", header.tool_version, header.schema)?;
    writeln!(out, "stages 0..={stages}, {} events", output.trace.events.len())?;
    let f_tail: Vec<(u64, &str)> = output
        .trace
        .events
        .iter()
        .filter_map(|ev| match &ev.kind {
            EventKind::StageEnd { f, .. } => Some((ev.stage, f.as_str())),
            _ => None,
        })
        .collect();
    writeln!(out, "f_s, last {F_TAIL} stages:")?;
    for (s, f) in &f_tail[f_tail.len().saturating_sub(F_TAIL)..] {
        writeln!(out, "  {s:>6}  {}", if f.is_empty() { "(root)" } else { f })?;
    }
    writeln!(out, "moves:")?;
    let moved: Vec<_> = output.intervals.iter().filter(|iv| iv.move_count > 0).collect();
    if moved.is_empty() {
        writeln!(out, "  none")?;
    }
    for iv in moved {
        writeln!(
            out,
            "  I_{} = [{}, {}] (φ_{}): {} move(s), last at stage {}, {:?}",
            iv.j,
            iv.min,
            iv.max,
            iv.assigned_phi,
            iv.move_count,
            iv.last_move_stage.unwrap_or(0),
            iv.state
        )?;
    }
    writeln!(out, "acts:")?;
    let mut acted = false;
    for ev in &output.trace.events {
        if let EventKind::Act { e, n, sigma, member, .. } = &ev.kind {
            acted = true;
            writeln!(
                out,
                "  stage {} node {:?}: G_{e} extends A↾{n} by {sigma} into {member}",
                ev.stage, ev.node_path
            )?;
        }
    }
    if !acted {
        writeln!(out, "  none")?;
    }
    let cap_hits = output
        .trace
        .events
        .iter()
        .filter(|ev| matches!(ev.kind, EventKind::CapHit { .. }))
        .count();
    writeln!(
        out,
        "requests {} (weight {}), cap hits {cap_hits}",
        output.requests.len(),
        output.requests.weight()
    )?;
    writeln!(out, "A↾{} = {}", config.snapshot_len, a.prefix(config.snapshot_len))?;
    writeln!(out, "wrote {}", trace_path.display())?;
    writeln!(out, "wrote {}", a_path.display())?;
    writeln!(out, "wrote {}", requests_path.display())?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let config = RunConfig::load(&args.config)?;
    let file = File::open(&args.trace).with_context(|| format!("cannot open {}", args.trace.display()))?;
    let trace = Trace::read_jsonl(BufReader::new(file))
        .with_context(|| format!("cannot read trace {}", args.trace.display()))?;
    let requests_path = args.requests.clone().unwrap_or_else(|| {
        args.trace
            .parent()
            .unwrap_or(Path::new("."))
            .join("requests.jsonl")
    });
    let requests = if args.requests.is_none() && !requests_path.exists() {
        RequestSet::new()
    } else {
        let file = File::open(&requests_path)
            .with_context(|| format!("cannot open {}", requests_path.display()))?;
        RequestSet::read_jsonl(BufReader::new(file))
            .with_context(|| format!("cannot read requests {}", requests_path.display()))?
    };
    let report = verify_run(&config, &trace, &requests)?;
    let json = serde_json::to_string_pretty(&report)?;
    match args.format {
        Format::Text => write!(out, "{}", report.to_text())?,
        Format::Json => writeln!(out, "{json}")?,
    }
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        fs::write(dir.join("report.json"), format!("{json}\n"))?;
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct ComplexityReport<'a> {
    target: &'a BitString,
    value: Option<u32>,
    witness: Option<&'a Witness>,
    horizon: u64,
    cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<&'a OutputTable>,
}

pub fn cmd_complexity(args: &ComplexityArgs, out: &mut dyn Write) -> Result<i32> {
    let um = load_roster(args.roster.as_deref())?;
    let table = enumerate_outputs(&um, args.cap, args.horizon);
    let witness = table.get(&args.target);
    let report = ComplexityReport {
        target: &args.target,
        value: witness.map(|w| w.length),
        witness,
        horizon: args.horizon,
        cap: args.cap,
        table: args.table.then_some(&table),
    };
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Text => {
            let target = if args.target.is_empty() { "ε".to_string() } else { args.target.to_string() };
            match witness {
                Some(w) => writeln!(
                    out,
                    "K({target}) = {} witness {} (horizon {}, cap {})",
                    w.length, w.program, args.horizon, args.cap
                )?,
                None => writeln!(
                    out,
                    "K({target}) = inf: no program of length ≤ {} prints it within {} steps",
                    args.cap, args.horizon
                )?,
            }
            if args.table {
                writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_solovay(args: &SolovayArgs, out: &mut dyn Write) -> Result<i32> {
    let um = load_roster(args.roster.as_deref())?;
    let solovay = Solovay::new(um, args.cap, args.horizon);
    let sweep = solovay.sweep(args.n_max)?;
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&sweep)?)?,
        Format::Text => write_sweep(&sweep, out)?,
    }
    Ok(if sweep.holds() { EXIT_OK } else { EXIT_FAILED })
}

fn write_sweep(sweep: &ChainSweep, out: &mut dyn Write) -> Result<()> {
    let opt = |v: Option<u32>| v.map_or("inf".to_string(), |v| v.to_string());
    writeln!(out, "horizon {}, cap {}, marker {}", sweep.horizon, sweep.cap, 2 * sweep.cap + 1)?;
    writeln!(
        out,
        "{:>4} {:>6} {:>7} {:>9} {:>8} {:>4} {:>10} {:>5}",
        "n", "s_n", "|tau_n|", "t", "K^t(tau)", "h", "K(<n,s>)", "K(n)"
    )?;
    for r in &sweep.rows {
        writeln!(
            out,
            "{:>4} {:>6} {:>7} {:>9} {:>8} {:>4} {:>10} {:>5}{}",
            r.n,
            r.s_n,
            r.tau_len,
            r.time_bound,
            opt(r.kt_tau),
            r.h,
            opt(r.k_pair),
            r.k_n,
            if r.gaps.is_empty() { String::new() } else { format!("  gaps: {}", r.gaps.join("; ")) }
        )?;
    }
    if !sweep.unsettled.is_empty() {
        writeln!(out, "unsettled: {:?}", sweep.unsettled)?;
    }
    let t = |t: &depthlab_core::solovay::Triple| format!("({}, {}, {})", t.c1, t.c2, t.c3);
    writeln!(out, "measured constants {}", t(&sweep.measured))?;
    writeln!(out, "coding constants   {}", t(&sweep.coding))?;
    writeln!(out, "chain {}", if sweep.holds() { "holds" } else { "FAILS" })?;
    Ok(())
}

#[derive(Serialize)]
struct KcAudit {
    requests: usize,
    weight: Dyadic,
    weight_f64: f64,
    bounded: bool,
    /// Number of requests per exponent.
    lengths: BTreeMap<u32, usize>,
    clamped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    codes: Option<Vec<(BitString, BitString)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fragment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refused: Option<String>,
}

pub fn cmd_kc(args: &KcArgs, out: &mut dyn Write) -> Result<i32> {
    let file = File::open(&args.requests).with_context(|| format!("cannot open {}", args.requests.display()))?;
    let requests = RequestSet::read_jsonl(BufReader::new(file))
        .with_context(|| format!("cannot read requests {}", args.requests.display()))?;
    let mut lengths = BTreeMap::new();
    for r in requests.requests() {
        *lengths.entry(r.w).or_insert(0) += 1;
    }
    let index = args.index.unwrap_or(reference_roster().len() as u32 + 1);
    let mut audit = KcAudit {
        requests: requests.len(),
        weight: requests.weight().clone(),
        weight_f64: requests.weight().to_f64(),
        bounded: requests.is_bounded(),
        lengths,
        clamped: requests.requests().iter().filter(|r| r.clamped).count(),
        codes: None,
        fragment: None,
        refused: None,
    };
    match requests.compile() {
        Ok(table) => {
            let roster = RosterFile {
                machines: vec![table.to_roster_entry(index, args.cost)],
            };
            audit.fragment = Some(toml::to_string(&roster)?);
            audit.codes = Some(table.codes);
        }
        Err(err) => audit.refused = Some(err.to_string()),
    }
    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&audit)?)?,
        Format::Text => {
            writeln!(out, "requests {}", audit.requests)?;
            writeln!(out, "weight {} ≈ {:.6}", audit.weight, audit.weight_f64)?;
            writeln!(out, "bounded {}", if audit.bounded { "yes" } else { "no" })?;
            for (w, count) in &audit.lengths {
                writeln!(out, "  w = {w}: {count}")?;
            }
            if audit.clamped > 0 {
                writeln!(out, "clamped {}", audit.clamped)?;
            }
            if let Some(codes) = &audit.codes {
                for (code, target) in codes {
                    writeln!(out, "  {code} -> {target}")?;
                }
            }
            if let Some(fragment) = &audit.fragment {
                writeln!(out, "# machine fragment, index {index}")?;
                write!(out, "{fragment}")?;
            }
            if let Some(reason) = &audit.refused {
                writeln!(out, "refused: {reason}")?;
            }
        }
    }
    Ok(if audit.refused.is_none() { EXIT_OK } else { EXIT_FAILED })
}
