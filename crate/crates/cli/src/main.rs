//! `bsft`: Bacon-Shor fault-tolerance toolkit.
//!
//! ```text
//! bsft code info --n 3
//! bsft gadget emit --n 3 --gadget exrec-cnot --ec steane --out steane.txt
//! bsft simulate --circuit steane.txt --faults "12:X,40:XZ"
//! bsft analyze exact --n 3 --ec steane --order 1,2 --out reports/
//! bsft analyze mc --n 5 --ec knill --order 3 --samples 100000 --seed 7 --out reports/k3.json
//! bsft threshold --reports reports/ --t 1 --out threshold.json
//! bsft reproduce-table1
//! ```

mod config;
mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bsft::circuits::{
    build_bell_prep_L, build_exrec, build_gauge_ec, build_knill_ec, build_prep_plus_L,
    build_prep_zero_L, build_steane_ec, text, AncillaPolicy, CheckOrder, Circuit, Criterion,
    EcMethod,
};
use bsft::code::decoded_logical_effect;
use bsft::faultsim::{circuit_correct, propagate, FaultAssignment};
use bsft::malignancy::{Analyzer, MalignancyReport, TOOL_VERSION};
use bsft::threshold::{compute_threshold_with, mc_threshold_with, Tail, ThresholdResult};
use bsft::{build_code, BaconShorCode};

use crate::config::{sidecar_path, usage, RunConfig, RunRecord, UsageError};

#[derive(Parser, Debug)]
#[command(
    name = "bsft",
    version,
    about = "Bacon-Shor codes, fault-tolerant gadgets and threshold bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect a Bacon-Shor code
    Code {
        #[command(subcommand)]
        command: CodeCommand,
    },
    /// Build gadget circuits
    Gadget {
        #[command(subcommand)]
        command: GadgetCommand,
    },
    /// Propagate a fault assignment through a circuit file
    Simulate(SimulateArgs),
    /// Count or sample malignant fault sets of a CNOT exRec
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
    /// Solve for the threshold bound from a directory of reports
    Threshold(ThresholdArgs),
    /// Run the whole pipeline and compare with the published table
    #[command(name = "reproduce-table1")]
    ReproduceTable1(table::TableArgs),
}

#[derive(Subcommand, Debug)]
enum CodeCommand {
    /// Parameters and generators
    Info {
        #[arg(long)]
        n: usize,
        /// Also list every generator
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Subcommand, Debug)]
enum GadgetCommand {
    /// Write a circuit in the text format
    Emit(EmitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GadgetKind {
    GaugeEc,
    Prep0,
    #[value(name = "prep+")]
    PrepPlus,
    Bell,
    SteaneEc,
    KnillEc,
    ExrecCnot,
}

/// ExRec construction options shared by several subcommands.
#[derive(Args, Debug, Clone)]
struct ExRecArgs {
    /// When an exRec counts as correct
    #[arg(long, default_value = "rectangle")]
    criterion: Criterion,
    /// Gauge EC ancilla scheduling
    #[arg(long, default_value = "per-check")]
    policy: AncillaPolicy,
    /// Gauge EC check order
    #[arg(long, default_value = "x-first")]
    check_order: CheckOrder,
    /// Gauge EC syndrome rounds (default t²+t+1)
    #[arg(long)]
    rounds: Option<usize>,
    /// Consecutive equal rounds the gauge decoder needs (default t+1)
    #[arg(long)]
    agree: Option<usize>,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    gadget: GadgetKind,
    /// EC method, for `exrec-cnot`
    #[arg(long, default_value = "steane")]
    ec: EcMethod,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exrec: ExRecArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Circuit in the text format
    #[arg(long)]
    circuit: PathBuf,
    /// Fault assignment, e.g. "12:X, 40:XZ, 7:F"
    #[arg(long)]
    faults: String,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Enumerate every set of k locations
    Exact(AnalyzeArgs),
    /// Sample uniform sets of k locations
    Mc(McArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    ec: EcMethod,
    /// Fault orders, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    order: Vec<usize>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Checkpoint directory (default: under $BSFT_CHECKPOINT_DIR, if set)
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Sets per exact-enumeration chunk
    #[arg(long, default_value_t = 1 << 16)]
    chunk_size: u64,
    /// Refuse exact runs estimated above this many evaluations
    #[arg(long, default_value_t = bsft::malignancy::DEFAULT_MAX_COST)]
    max_cost: f64,
    /// Report file (one order) or directory (several orders); stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exrec: ExRecArgs,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    common: AnalyzeArgs,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    /// Directory of malignancy reports
    #[arg(long)]
    reports: PathBuf,
    /// Faults the code corrects
    #[arg(long)]
    t: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "binomial")]
    tail: Tail,
    /// Pick this exRec when the directory holds several
    #[arg(long)]
    exrec: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Code {
            command: CodeCommand::Info { n, verbose },
        } => code_info(n, verbose),
        Command::Gadget {
            command: GadgetCommand::Emit(a),
        } => gadget_emit(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Analyze { command } => {
            let (cfg, out) = match command {
                AnalyzeCommand::Exact(a) => (config_from(&a, None, None)?, a.out),
                AnalyzeCommand::Mc(m) => (
                    config_from(&m.common, Some(m.samples), Some(m.seed))?,
                    m.common.out,
                ),
            };
            analyze(&cfg, out.as_deref()).map(|_| ())
        }
        Command::Threshold(a) => threshold(&a).map(|_| ()),
        Command::ReproduceTable1(a) => table::reproduce(&a),
    }
}

fn code(n: usize) -> Result<BaconShorCode> {
    if !(2..=config::MAX_N).contains(&n) {
        return Err(usage(format!(
            "--n must be in 2..={}, got {n}",
            config::MAX_N
        )));
    }
    Ok(build_code(n)?)
}

fn code_info(n: usize, verbose: bool) -> Result<()> {
    let c = code(n)?;
    let (nq, k, d) = c.parameters();
    println!("[[{nq},{k},{d}]]");
    println!("stabilizer generators: {}", c.stabilizer_gens().len());
    println!("gauge generators: {}", c.gauge_gens().len());
    println!("logical X: {}", c.logical_x());
    println!("logical Z: {}", c.logical_z());
    if verbose {
        for (i, s) in c.stabilizer_gens().iter().enumerate() {
            println!("S{i}: {s}");
        }
        for (i, g) in c.gauge_gens().iter().enumerate() {
            println!("G{i}: {g}");
        }
    }
    Ok(())
}

fn base_config(n: usize, ec: EcMethod, x: &ExRecArgs) -> RunConfig {
    let mut cfg = RunConfig::new(n, ec);
    cfg.criterion = x.criterion;
    cfg.gauge.policy = x.policy;
    cfg.gauge.order = x.check_order;
    cfg.gauge.rounds = x.rounds;
    cfg.gauge.agree = x.agree;
    cfg
}

fn gadget_emit(a: &EmitArgs) -> Result<()> {
    let cd = code(a.n)?;
    let cfg = base_config(a.n, a.ec, &a.exrec);
    cfg.exrec_options()
        .gauge
        .validate()
        .map_err(|e| usage(e.to_string()))?;
    let c: Circuit = match a.gadget {
        GadgetKind::GaugeEc => build_gauge_ec(&cd, &cfg.exrec_options().gauge)?,
        GadgetKind::Prep0 => build_prep_zero_L(&cd)?,
        GadgetKind::PrepPlus => build_prep_plus_L(&cd)?,
        GadgetKind::Bell => build_bell_prep_L(&cd)?,
        GadgetKind::SteaneEc => build_steane_ec(&cd)?,
        GadgetKind::KnillEc => build_knill_ec(&cd)?,
        GadgetKind::ExrecCnot => build_exrec(&cd, a.ec, &cfg.exrec_options())?
            .circuit()
            .clone(),
    };
    let s = text::dump(&c);
    match &a.out {
        Some(p) => {
            fs::write(p, &s).with_context(|| format!("writing {}", p.display()))?;
            eprintln!(
                "{}: {} locations, {} layers",
                p.display(),
                c.num_locations(),
                c.num_layers()
            );
        }
        None => print!("{s}"),
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let src = fs::read_to_string(&a.circuit)
        .with_context(|| format!("reading {}", a.circuit.display()))?;
    let c = text::parse(&src).with_context(|| format!("parsing {}", a.circuit.display()))?;
    let faults = FaultAssignment::parse(&a.faults).map_err(|e| usage(e.to_string()))?;
    let r = propagate(&c, &faults)?;
    let cd = build_code(c.n())?;
    println!("faults: {faults}");
    let flips: Vec<String> = r
        .outcome_flips
        .iter_ones()
        .map(|m| format!("m{m}"))
        .collect();
    println!("flipped outcomes: [{}]", flips.join(", "));
    for (i, res) in r.residual.iter().enumerate() {
        println!(
            "output {i}: residual {res}, decodes to {}",
            decoded_logical_effect(&cd, res)?
        );
    }
    println!("correct: {}", circuit_correct(&c, &faults)?);
    Ok(())
}

fn config_from(a: &AnalyzeArgs, samples: Option<u64>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = base_config(a.n, a.ec, &a.exrec);
    cfg.orders = a.order.clone();
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.jobs = a.jobs.unwrap_or(0);
    cfg.chunk_size = a.chunk_size;
    cfg.max_cost = a.max_cost;
    cfg.checkpoint_dir = a.checkpoint.clone();
    cfg.output = a.out.clone();
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(
    path: &Path,
    report: &MalignancyReport,
    cfg: &RunConfig,
    elapsed: f64,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    let record = RunRecord {
        tool_version: TOOL_VERSION,
        circuit_hash: &report.circuit_hash,
        exrec: &report.exrec,
        config: cfg,
        elapsed_seconds: elapsed,
    };
    fs::write(
        sidecar_path(path),
        serde_json::to_string_pretty(&record)? + "\n",
    )?;
    Ok(())
}

/// Runs every requested order; returns the reports.
pub(crate) fn analyze(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<MalignancyReport>> {
    let cd = code(cfg.n)?;
    let exrec = build_exrec(&cd, cfg.ec_method, &cfg.exrec_options())?;
    let an = Analyzer::new(&exrec)?;
    eprintln!("{}: {} locations", an.descriptor(), an.num_locations());
    let mut reports = Vec::new();
    for &k in &cfg.orders {
        let ckpt = cfg.checkpoint_for(an.descriptor(), k);
        if let Some(p) = &ckpt {
            eprintln!("order {k}: checkpoints in {}", p.display());
        }
        let opts = cfg.run_options(ckpt);
        let t = Instant::now();
        let report = match (cfg.samples, cfg.seed) {
            (Some(n), Some(seed)) => an.sample_mc(k, n, seed, &opts)?,
            _ => an.enumerate_exact(k, &opts)?,
        };
        let elapsed = t.elapsed().as_secs_f64();
        eprintln!(
            "order {k}: fraction {:.6e} (sigma {:.2e}), alpha {:.6e}, {elapsed:.1}s",
            report.fraction(),
            report.sigma(),
            report.alpha()
        );
        match out {
            Some(p) if cfg.orders.len() == 1 && p.extension().is_some() => {
                write_report(p, &report, cfg, elapsed)?
            }
            Some(dir) => write_report(&dir.join(format!("k{k}.json")), &report, cfg, elapsed)?,
            None => print!("{}", report.to_json()),
        }
        reports.push(report);
    }
    Ok(reports)
}

/// Loads every report in `dir`, skipping run sidecars.
fn load_reports(dir: &Path) -> Result<Vec<MalignancyReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && !p.to_string_lossy().ends_with(".run.json")
        })
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let s = fs::read_to_string(&p)?;
        match MalignancyReport::from_json(&s) {
            Ok(r) => out.push(r),
            Err(e) => eprintln!("skipping {}: {e}", p.display()),
        }
    }
    Ok(out)
}

pub(crate) fn solve(reports: &[MalignancyReport], t: usize, tail: Tail) -> Result<ThresholdResult> {
    let l = reports.first().context("no reports")?.locations;
    let mc = reports.iter().any(|r| !r.is_exact());
    Ok(if mc {
        mc_threshold_with(reports, l, t, tail)?
    } else {
        compute_threshold_with(reports, l, t, tail)?
    })
}

fn threshold(a: &ThresholdArgs) -> Result<ThresholdResult> {
    let mut reports = load_reports(&a.reports)?;
    if let Some(want) = &a.exrec {
        reports.retain(|r| &r.exrec == want);
    }
    let mut kinds: Vec<&str> = reports.iter().map(|r| r.exrec.as_str()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    match kinds.len() {
        0 => bail!("no malignancy reports in {}", a.reports.display()),
        1 => {}
        _ => {
            return Err(usage(format!(
                "reports describe several exRecs {kinds:?}; pick one with --exrec"
            )))
        }
    }
    let res = solve(&reports, a.t, a.tail)?;
    fs::write(&a.out, res.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    print_threshold(&res);
    Ok(res)
}

fn print_threshold(res: &ThresholdResult) {
    let desc = res.inputs.first().map(|r| r.exrec.as_str()).unwrap_or("?");
    match res.one_sigma_interval {
        Some([lo, hi]) => println!(
            "{desc}: eps0 = {:.4e} (1 sigma [{lo:.4e}, {hi:.4e}]{})",
            res.epsilon_0,
            if res.one_sided { ", one-sided" } else { "" }
        ),
        None => println!("{desc}: eps0 = {:.4e}", res.epsilon_0),
    }
    println!(
        "certificate: E({:.6e}) = {:.6e}, E({:.6e}) = {:.6e}{}",
        res.certificate.epsilon,
        res.certificate.e_at_epsilon,
        res.certificate.epsilon_above,
        res.certificate.e_at_epsilon_above,
        if res.certificate.capped {
            " (capped)"
        } else {
            ""
        }
    );
}
