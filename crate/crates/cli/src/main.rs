//! `kdil`: construct sphere maps, estimate k-dilation, compute Hopf
//! invariants by fiber linking, and query the filtration certificate ledger.
//!
//! Exit codes: 0 success, 1 usage error, 2 ledger miss, 3 numerical-stage
//! failure, 4 acceptance-threshold miss.

mod config;
mod maplang;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use kdilation::dilation::{kdilation_seeded, scaling_sweep, SweepConfig, DEFAULT_SEED};
use kdilation::expr::{degree_one_cube_map, hopf_cube_map, prop1_construct, MapExpr};
use kdilation::hopf::{gromov_audit, hopf_invariant_detailed, DEFAULT_STEP};
use kdilation::ledger;
use kdilation::LedgerError;

use config::{write_atomic, Construction, RunConfig};
use maplang::{parse_map_spec, parse_rational};

const EXIT_USAGE: u8 = 1;
const EXIT_LEDGER_MISS: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

/// Slope must match the predicted exponent within this tolerance for a
/// sweep to succeed.
const SLOPE_TOL: f64 = 0.15;

#[derive(Parser)]
#[command(name = "kdil", version, about = "k-dilation constructions and measurements on spheres")]
struct Cli {
    /// Optional JSON run configuration; flags override file values.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed for every stochastic stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample budget for dilation estimation.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Output file (single-artifact commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: text or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Query the encoded filtration facts for pi_m(S^n).
    Filtration(FiltrationArgs),
    /// Enumerate target dimensions M admitting nontrivial classes from S^M
    /// with arbitrarily small 3-dilation into S^N.
    Targets(TargetsArgs),
    /// Build the rectangle construction and emit its expression tree.
    Construct(ConstructArgs),
    /// Estimate the supremal k-dilation of a map.
    Dilation(DilationArgs),
    /// Sweep the construction over an epsilon grid and fit the scaling
    /// exponent.
    Sweep(SweepArgs),
    /// Compute the Hopf invariant of a map S^3 -> S^2 by fiber linking.
    Hopf(HopfArgs),
    /// Audit the quadratic bound |H| <= C D^2 on a map S^3 -> S^2.
    Audit(AuditArgs),
}

#[derive(Args)]
struct FiltrationArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    /// Restrict to certificates at one k.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct TargetsArgs {
    /// Target sphere dimension N >= 2.
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 5)]
    count: usize,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    p: Option<u32>,
    /// Rectangle parameter, e.g. 1/4.
    #[arg(long)]
    epsilon: Option<String>,
    /// Cube-map identifier for the base class: hopf or degree1.
    #[arg(long)]
    f1: Option<String>,
    /// Cube-map identifier for the degree-one factor: degree1.
    #[arg(long)]
    f2: Option<String>,
}

#[derive(Args)]
struct DilationArgs {
    /// Map spec: hopf, constant, reflect, wrap(d), compositions with
    /// `∘` or `*`, or @file.json.
    #[arg(long)]
    map: String,
    #[arg(long)]
    k: u32,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    /// Comma-separated epsilon grid, e.g. 1/2,1/4,1/8,1/16.
    #[arg(long)]
    eps: Option<String>,
    /// Directory for sweep.csv and sweep_summary.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
}

#[derive(Args)]
struct HopfArgs {
    #[arg(long)]
    map: String,
    /// Fiber-tracing arclength step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    map: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

fn numerical(msg: impl std::fmt::Display) -> CmdError {
    CmdError {
        code: EXIT_NUMERICAL,
        message: msg.to_string(),
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    let file_cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(file_cfg.seed).unwrap_or(DEFAULT_SEED);
    let budget = cli.budget.or(file_cfg.budget).unwrap_or(20_000);
    let format = cli
        .format
        .clone()
        .or_else(|| file_cfg.format.clone())
        .unwrap_or_else(|| "text".to_string());
    if format != "text" && format != "json" {
        return Err(usage(format!("unknown format `{format}`")));
    }
    let started = std::time::Instant::now();
    let result = match &cli.command {
        Command::Filtration(args) => cmd_filtration(&cli, args, &format),
        Command::Targets(args) => cmd_targets(&cli, args, &format),
        Command::Construct(args) => cmd_construct(&cli, args, &file_cfg),
        Command::Dilation(args) => cmd_dilation(&cli, args, seed, budget),
        Command::Sweep(args) => cmd_sweep(&cli, args, &file_cfg, seed, budget),
        Command::Hopf(args) => cmd_hopf(&cli, args, budget),
        Command::Audit(args) => cmd_audit(&cli, args, budget),
    };
    if result.is_ok() {
        eprintln!("wall time: {:.2?}", started.elapsed());
    }
    result
}

fn emit(cli: &Cli, text: &str) -> Result<(), CmdError> {
    match &cli.out {
        Some(path) => write_atomic(path, text).map_err(|e| numerical(format!("write: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_filtration(cli: &Cli, args: &FiltrationArgs, format: &str) -> Result<(), CmdError> {
    let certs = match ledger::filtration_table(args.m, args.n) {
        Ok(certs) => certs,
        Err(e @ LedgerError::NoEncodedFacts { .. }) => {
            return Err(CmdError {
                code: EXIT_LEDGER_MISS,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let certs: Vec<_> = certs
        .into_iter()
        .filter(|c| args.k.map(|k| c.k == k).unwrap_or(true))
        .collect();
    if format == "json" {
        let text = serde_json::to_string_pretty(&certs).expect("certificates serialize");
        return emit(cli, &text);
    }
    let mut out = format!("filtration facts for pi_{}(S^{}):\n", args.m, args.n);
    let store = ledger::fact_store();
    for c in &certs {
        let status = match c.verdict {
            ledger::Verdict::Unknown => {
                if c.note.starts_with("open question") {
                    "OPEN    "
                } else {
                    "FACT    "
                }
            }
            ledger::Verdict::Member => "member  ",
            ledger::Verdict::NonMember => "excluded",
        };
        let checked = match ledger::certificate_check(store, c) {
            Ok(true) => "ok",
            Ok(false) => "VIOLATED",
            Err(_) => "unresolved",
        };
        let torsion = c
            .class
            .torsion_order
            .map(|t| format!(" (torsion {t})"))
            .unwrap_or_default();
        out.push_str(&format!(
            "  k={} {} [{}] {}{} -- {} [{}]\n",
            c.k,
            status,
            c.rule.name(),
            c.class.label,
            torsion,
            c.note,
            checked,
        ));
    }
    emit(cli, out.trim_end())
}

fn cmd_targets(cli: &Cli, args: &TargetsArgs, format: &str) -> Result<(), CmdError> {
    if args.n < 2 {
        return Err(usage("targets needs --n at least 2"));
    }
    if args.n == 2 {
        let cert = ledger::s2_rank_certificate(3);
        if format == "json" {
            return emit(cli, &serde_json::to_string_pretty(&cert).unwrap());
        }
        return emit(
            cli,
            &format!(
                "every class into S^2 has 3-dilation zero; certificate [{}]: {}",
                cert.rule.name(),
                cert.note
            ),
        );
    }
    let certs = ledger::theorem1_certificates(args.n, args.count)
        .map_err(|e| usage(e.to_string()))?;
    if format == "json" {
        return emit(cli, &serde_json::to_string_pretty(&certs).unwrap());
    }
    let ms: Vec<String> = certs.iter().map(|(m, _)| m.to_string()).collect();
    let mut out = format!("M = {}\n", ms.join(", "));
    let store = ledger::fact_store();
    for (m, cert) in &certs {
        let ok = ledger::certificate_check(store, cert).map_err(|e| usage(e.to_string()))?;
        out.push_str(&format!(
            "  S^{} -> S^{}: member of V_3 via {} ({}) [{}]\n",
            m,
            args.n,
            cert.rule.name(),
            cert.class.label,
            if ok { "ok" } else { "VIOLATED" }
        ));
    }
    emit(cli, out.trim_end())
}

fn build_cube_map(id: &str, dim: u32, target: u32) -> Result<MapExpr, CmdError> {
    match id {
        "hopf" => {
            if (dim, target) != (3, 2) {
                return Err(usage("f1=hopf requires m=3, n=2"));
            }
            Ok(hopf_cube_map())
        }
        "degree1" => {
            if dim != target {
                return Err(usage("f=degree1 requires equal dimensions"));
            }
            Ok(degree_one_cube_map(dim as usize))
        }
        other => Err(usage(format!("unknown cube map `{other}`"))),
    }
}

fn construction_of(
    args_m: Option<u32>,
    args_n: Option<u32>,
    args_p: Option<u32>,
    f1: Option<&str>,
    f2: Option<&str>,
    cfg: &RunConfig,
) -> Result<Construction, CmdError> {
    let base = cfg.construction.clone();
    let m = args_m
        .or(base.as_ref().map(|c| c.m))
        .ok_or_else(|| usage("missing --m"))?;
    let n = args_n
        .or(base.as_ref().map(|c| c.n))
        .ok_or_else(|| usage("missing --n"))?;
    let p = args_p
        .or(base.as_ref().map(|c| c.p))
        .ok_or_else(|| usage("missing --p"))?;
    Ok(Construction {
        m,
        n,
        p,
        f1: f1
            .map(str::to_string)
            .or(base.as_ref().map(|c| c.f1.clone()))
            .unwrap_or_else(|| "hopf".to_string()),
        f2: f2
            .map(str::to_string)
            .or(base.map(|c| c.f2))
            .unwrap_or_else(|| "degree1".to_string()),
    })
}

fn cmd_construct(cli: &Cli, args: &ConstructArgs, cfg: &RunConfig) -> Result<(), CmdError> {
    let cons = construction_of(args.m, args.n, args.p, args.f1.as_deref(), args.f2.as_deref(), cfg)?;
    let eps = match &args.epsilon {
        Some(text) => parse_rational(text).map_err(usage)?,
        None => cfg
            .epsilon_values()
            .map_err(usage)?
            .and_then(|v| v.first().copied())
            .ok_or_else(|| usage("missing --epsilon"))?,
    };
    let f1 = build_cube_map(&cons.f1, cons.m, cons.n)?;
    let f2 = build_cube_map(&cons.f2, cons.p, cons.p)?;
    let expr = prop1_construct(cons.m, cons.n, cons.p, Arc::new(f1), Arc::new(f2), eps)
        .map_err(numerical)?;
    emit(cli, &expr.to_json_string())
}

fn cmd_dilation(cli: &Cli, args: &DilationArgs, seed: u64, budget: usize) -> Result<(), CmdError> {
    let map = parse_map_spec(&args.map).map_err(usage)?;
    let report = kdilation_seeded(&map, args.k, budget, seed).map_err(numerical)?;
    emit(cli, &serde_json::to_string_pretty(&report).expect("report serializes"))
}

fn cmd_sweep(
    _cli: &Cli,
    args: &SweepArgs,
    cfg: &RunConfig,
    seed: u64,
    budget: usize,
) -> Result<(), CmdError> {
    let cons = construction_of(args.m, args.n, args.p, args.f1.as_deref(), args.f2.as_deref(), cfg)?;
    let k = args.k.or(cfg.k).ok_or_else(|| usage("missing --k"))?;
    let eps_grid = match &args.eps {
        Some(list) => {
            let mut out = Vec::new();
            for item in list.split(',') {
                out.push(parse_rational(item).map_err(usage)?);
            }
            out
        }
        None => cfg
            .epsilon_values()
            .map_err(usage)?
            .ok_or_else(|| usage("missing --eps grid"))?,
    };
    if eps_grid.is_empty() {
        return Err(usage("epsilon grid is empty"));
    }
    let f1 = build_cube_map(&cons.f1, cons.m, cons.n)?;
    let f2 = build_cube_map(&cons.f2, cons.p, cons.p)?;
    let sweep_cfg = SweepConfig {
        m: cons.m,
        n: cons.n,
        p: cons.p,
        k,
        eps_grid,
        budget,
        seed,
    };
    let result = scaling_sweep(Arc::new(f1), Arc::new(f2), sweep_cfg).map_err(numerical)?;

    let dir = args
        .out_dir
        .clone()
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let csv_path = dir.join("sweep.csv");
    let json_path = dir.join("sweep_summary.json");
    write_atomic(&csv_path, &result.to_csv()).map_err(|e| numerical(format!("write csv: {e}")))?;
    #[derive(serde::Serialize)]
    struct SweepReport<'a> {
        tool_version: &'a str,
        #[serde(flatten)]
        result: &'a kdilation::dilation::SweepResult,
    }
    let summary = serde_json::to_string_pretty(&SweepReport {
        tool_version: env!("CARGO_PKG_VERSION"),
        result: &result,
    })
    .expect("sweep serializes");
    write_atomic(&json_path, &summary).map_err(|e| numerical(format!("write json: {e}")))?;

    let verdict = result.slope_matches_prediction(SLOPE_TOL);
    println!(
        "k={} predicted exponent {} ({}), fitted slope {}{}",
        result.config.k,
        result.predicted_exponent_float,
        if result.growth {
            "growth as eps shrinks"
        } else {
            "decay as eps shrinks"
        },
        result
            .slope
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "undefined (vanishing estimates)".to_string()),
        if verdict { "" } else { " [MISMATCH]" },
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    if verdict {
        Ok(())
    } else {
        Err(CmdError {
            code: EXIT_THRESHOLD,
            message: format!(
                "fitted slope {:?} misses predicted exponent {} by more than {SLOPE_TOL}",
                result.slope, result.predicted_exponent_float
            ),
        })
    }
}

fn cmd_hopf(cli: &Cli, args: &HopfArgs, budget: usize) -> Result<(), CmdError> {
    let map = parse_map_spec(&args.map).map_err(usage)?;
    let comp = hopf_invariant_detailed(&map, args.step).map_err(numerical)?;
    let audit = gromov_audit(&map, budget).map_err(numerical)?;
    println!(
        "H = {} (fibers: {} + {} components), D = {:.6}, ratio = {:.6}, bound {}",
        comp.linking,
        comp.trace1.components.len(),
        comp.trace2.components.len(),
        audit.dilation2.estimate,
        audit.ratio,
        if audit.pass { "holds" } else { "FAILS" },
    );
    if cli.out.is_some() {
        #[derive(serde::Serialize)]
        struct HopfReport {
            audit: kdilation::hopf::GromovAudit,
            fibers: kdilation::hopf::HopfComputation,
        }
        let text = serde_json::to_string_pretty(&HopfReport {
            audit,
            fibers: comp,
        })
        .expect("computation serializes");
        emit(cli, &text)?;
    }
    Ok(())
}

fn cmd_audit(cli: &Cli, args: &AuditArgs, budget: usize) -> Result<(), CmdError> {
    let map = parse_map_spec(&args.map).map_err(usage)?;
    let audit = gromov_audit(&map, budget).map_err(numerical)?;
    let text = serde_json::to_string_pretty(&audit).expect("audit serializes");
    emit(cli, &text)?;
    if audit.pass {
        Ok(())
    } else {
        Err(CmdError {
            code: EXIT_THRESHOLD,
            message: format!(
                "|H| = {} exceeds fitted_c * D^2 = {}",
                audit.hopf_invariant.unsigned_abs(),
                audit.fitted_c * audit.dilation2.estimate * audit.dilation2.estimate
            ),
        })
    }
}
