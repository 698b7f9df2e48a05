//! permdiv: generate families, measure diversity, run the spread
//! decomposition and sunflower cascade, certify the inequality suite, and
//! drive the Monte Carlo and search experiments.
//!
//! Exit codes: 0 success, 2 input error, 3 hypothesis not met (or verdicts
//! left undecided), 4 work budget exceeded, 5 internal invariant violation.

mod output;

use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Value};

use output::{render, Format};
use permdiv_core::bounds::{
    check_decomposition_bounds, check_diversity_chain, derangement_big, derangement_floor, CertificateReport,
    Verdict, DEFAULT_PRECISION_CAP,
};
use permdiv_core::error::Error as CoreError;
use permdiv_core::family::{
    diversity, enumerate_symmetric_group_capped, make_star_capped, make_triangle_family_capped,
    Cell, PartialFamily, PermFamily, DEFAULT_DEGREE_CAP,
};
use permdiv_core::search::{exact_max_diversity, local_search_max_diversity, SearchMode};
use permdiv_core::spread::{spread_decompose, Budget, QCap, SpreadParams, StopReason};
use permdiv_core::stochastic::{
    disjoint_split_experiment, estimate_cover_probability, verify_spread_lemma, EstimateReport,
    Probability, TrialConfig,
};
use permdiv_core::sunflower::{basis_cascade, compress, CascadeResult, TwoUniformClass};
use permdiv_core::textio::{parse_family, serialize_partial_family, serialize_perm_family};

const EXIT_INPUT: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_INVARIANT: u8 = 5;

struct Failure {
    code: u8,
    msg: String,
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::BudgetExceeded { .. } => EXIT_BUDGET,
            CoreError::HypothesisNotMet(_) => EXIT_HYPOTHESIS,
            CoreError::InvariantViolation(_) => EXIT_INVARIANT,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn input_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        msg: msg.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "permdiv",
    version,
    about = "Diversity of intersecting permutation families: enumeration, spread decomposition, sunflower bases, certified bounds"
)]
struct Cli {
    /// Output rendering for the run record.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Node budget for exponential searches (overrides PERMDIV_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads for Monte Carlo runs (execution detail; results do
    /// not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family in the text format.
    Gen(GenArgs),
    /// Diversity report of a permutation family.
    Diversity(InputArgs),
    /// Spread-approximation decomposition of a permutation family.
    Decompose(DecomposeArgs),
    /// Pseudo-sunflower compression of a (partial) family.
    Compress(CompressArgs),
    /// Level-by-level basis cascade of a (partial) family.
    Cascade(CascadeArgs),
    /// Certified inequality suite.
    VerifyBounds(VerifyBoundsArgs),
    /// Monte Carlo experiments.
    Montecarlo(MonteCarloArgs),
    /// Extremal search for high-diversity intersecting families.
    Search(SearchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Degree n.
    #[arg(long)]
    n: usize,
    /// The triangle family.
    #[arg(long, conflicts_with_all = ["star", "symmetric"])]
    triangle: bool,
    /// The star with the given center, as row:col.
    #[arg(long, value_name = "R:C", conflicts_with = "symmetric")]
    star: Option<String>,
    /// The full symmetric group.
    #[arg(long)]
    symmetric: bool,
    /// Write to a file instead of standard out.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Family file, or - for standard input.
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: String,
    /// Spreadness parameter as a rational a/b.
    #[arg(long)]
    r: String,
    /// Root size cap: a rational, or the default 4*log2(n).
    #[arg(long, value_name = "Q")]
    q_cap: Option<String>,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    input: String,
    /// Uniformity of the pseudo sunflowers searched for.
    #[arg(long)]
    s: usize,
}

#[derive(Args)]
struct CascadeArgs {
    #[arg(long)]
    input: String,
    /// Top cascade level; defaults to floor(4*log2(n)).
    #[arg(long)]
    q_int: Option<usize>,
}

#[derive(Args)]
struct VerifyBoundsArgs {
    /// Comma-separated list of degrees, e.g. 500,1000.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Precision cap in bits (overrides PERMDIV_PRECISION_CAP).
    #[arg(long)]
    precision: Option<u32>,
    /// Also check the derangement floor identity for m = 1..=M.
    #[arg(long, value_name = "M")]
    derangements: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// Pr[some member is inside a p-random subset of the grid].
    Cover,
    /// The cover experiment at p = m*delta against the certified bound.
    Lemma,
    /// Two members inside complementary random halves.
    Split,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[arg(long)]
    input: String,
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Inclusion probability as a rational a/b (cover experiment).
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Spreadness parameter a/b (lemma experiment).
    #[arg(long)]
    r: Option<String>,
    /// Density parameter a/b in (0,1) (lemma experiment).
    #[arg(long)]
    delta: Option<String>,
    /// Multiplier a/b, giving p = m*delta (lemma experiment).
    #[arg(long)]
    m: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Heuristic,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Hill-climbing restarts (heuristic mode).
    #[arg(long, default_value_t = 32)]
    iterations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct CommandOutput {
    subcommand: &'static str,
    config: Value,
    result: Value,
    /// Raw text payload used instead of the flattened record in text mode.
    text_override: Option<String>,
    /// Failure to report (as the exit status) after printing the record.
    post_failure: Option<Failure>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match dispatch(&cli) {
        Ok(out) => {
            let rendered = match (cli.format, &out.text_override) {
                (Format::Text, Some(text)) => text.clone(),
                _ => {
                    let record = json!({
                        "tool": "permdiv",
                        "version": env!("CARGO_PKG_VERSION"),
                        "command": {"subcommand": out.subcommand, "config": out.config},
                        "result": out.result,
                    });
                    render(&record, cli.format)
                }
            };
            print!("{rendered}");
            match out.post_failure {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    eprintln!("permdiv: {}", f.msg);
                    ExitCode::from(f.code)
                }
            }
        }
        Err(f) => {
            eprintln!("permdiv: error: {}", f.msg);
            ExitCode::from(f.code)
        }
    };
    eprintln!("# wall time: {:.3}s", started.elapsed().as_secs_f64());
    code
}

fn dispatch(cli: &Cli) -> CliResult<CommandOutput> {
    match &cli.command {
        Command::Gen(args) => run_gen(cli, args),
        Command::Diversity(args) => run_diversity(args),
        Command::Decompose(args) => run_decompose(cli, args),
        Command::Compress(args) => run_compress(cli, args),
        Command::Cascade(args) => run_cascade(cli, args),
        Command::VerifyBounds(args) => run_verify_bounds(args),
        Command::Montecarlo(args) => run_montecarlo(cli, args),
        Command::Search(args) => run_search(args),
    }
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok()?.parse().ok()
}

fn budget_of(cli: &Cli) -> Budget {
    let limit = cli
        .budget
        .or_else(|| env_u64("PERMDIV_BUDGET"))
        .unwrap_or(permdiv_core::spread::DEFAULT_WORK_BUDGET);
    Budget { limit }
}

fn degree_cap() -> usize {
    env_u64("PERMDIV_DEGREE_CAP")
        .map(|v| v as usize)
        .unwrap_or(DEFAULT_DEGREE_CAP)
}

fn precision_cap(flag: Option<u32>) -> u32 {
    flag.or_else(|| env_u64("PERMDIV_PRECISION_CAP").map(|v| v as u32))
        .unwrap_or(DEFAULT_PRECISION_CAP)
}

fn workers_of(cli: &Cli) -> usize {
    cli.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Rationals are written a/b or as a plain integer; reals are rejected.
fn parse_rational(text: &str) -> CliResult<BigRational> {
    let t = text.trim();
    if t.contains('.') {
        return Err(input_error(format!(
            "'{t}': decimal numbers are not accepted, use a rational a/b"
        )));
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b),
        None => (t, "1"),
    };
    let num: num_bigint::BigInt = num
        .parse()
        .map_err(|_| input_error(format!("bad rational numerator '{num}'")))?;
    let den: num_bigint::BigInt = den
        .parse()
        .map_err(|_| input_error(format!("bad rational denominator '{den}'")))?;
    if den.is_negative() || den == 0.into() {
        return Err(input_error("rational denominator must be positive"));
    }
    Ok(BigRational::new(num, den))
}

fn parse_cell(text: &str) -> CliResult<Cell> {
    let (r, c) = text
        .split_once(':')
        .ok_or_else(|| input_error(format!("expected row:col, found '{text}'")))?;
    let parse = |s: &str| -> CliResult<u8> {
        s.parse()
            .map_err(|_| input_error(format!("bad coordinate '{s}'")))
    };
    Ok(Cell::new(parse(r)?, parse(c)?))
}

fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| input_error(format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| input_error(format!("reading {path}: {e}")))
    }
}

fn read_perm_family(path: &str) -> CliResult<PermFamily> {
    Ok(parse_family(&read_input(path)?)
        .map_err(Failure::from)?
        .into_perms()
        .map_err(Failure::from)?)
}

fn read_partial_family(path: &str) -> CliResult<PartialFamily> {
    Ok(parse_family(&read_input(path)?)
        .map_err(Failure::from)?
        .into_partials()
        .map_err(Failure::from)?)
}

fn run_gen(_cli: &Cli, args: &GenArgs) -> CliResult<CommandOutput> {
    let cap = degree_cap();
    let (kind, family): (&str, PermFamily) = if args.triangle {
        ("triangle", make_triangle_family_capped(args.n, cap).map_err(Failure::from)?)
    } else if let Some(center) = &args.star {
        let cell = parse_cell(center)?;
        ("star", make_star_capped(args.n, cell, cap).map_err(Failure::from)?)
    } else if args.symmetric {
        (
            "symmetric",
            enumerate_symmetric_group_capped(args.n, cap).map_err(Failure::from)?,
        )
    } else {
        return Err(input_error(
            "choose one of --triangle, --star R:C, --symmetric",
        ));
    };
    let text = serialize_perm_family(&family);
    if let Some(path) = &args.out {
        std::fs::write(path, &text)
            .map_err(|e| input_error(format!("writing {}: {e}", path.display())))?;
    }
    Ok(CommandOutput {
        subcommand: "gen",
        config: json!({"kind": kind, "n": args.n, "star": args.star}),
        result: json!({"degree": family.degree(), "size": family.len(), "family_text": text}),
        text_override: Some(if args.out.is_some() {
            String::new()
        } else {
            text
        }),
        post_failure: None,
    })
}

fn run_diversity(args: &InputArgs) -> CliResult<CommandOutput> {
    let family = read_perm_family(&args.input)?;
    let report = diversity(&family).map_err(Failure::from)?;
    let table: Value = report
        .codegree_table
        .iter()
        .map(|(cell, count)| json!({"cell": cell.to_string(), "codegree": count}))
        .collect::<Vec<_>>()
        .into();
    Ok(CommandOutput {
        subcommand: "diversity",
        config: json!({"input": args.input}),
        result: json!({
            "degree": family.degree(),
            "size": family.len(),
            "gamma": report.gamma,
            "argmin_cell": report.argmin_cell.to_string(),
            "codegree_table": table,
        }),
        text_override: None,
        post_failure: None,
    })
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs) -> CliResult<CommandOutput> {
    let family = read_perm_family(&args.input)?;
    let r = parse_rational(&args.r)?;
    let mut params = SpreadParams::new(r.clone(), family.degree()).map_err(Failure::from)?;
    if let Some(q) = &args.q_cap {
        if q != "4log2n" {
            params = params.with_q_cap(QCap::Fixed(parse_rational(q)?));
        }
    }
    let dec = spread_decompose(&family, &params, &budget_of(cli)).map_err(Failure::from)?;
    let (q_lo, q_hi) = params.q_cap.endpoint_strings().map_err(Failure::from)?;
    let branches: Vec<Value> = dec
        .branches
        .iter()
        .map(|b| {
            json!({
                "root": b.root.to_string(),
                "family_size": b.family.len(),
                "restriction_spread": b.restriction_spread,
            })
        })
        .collect();
    let stop = match &dec.stop_reason {
        StopReason::Exhausted => json!({"kind": "exhausted"}),
        StopReason::OversizeWitness(w) => {
            json!({"kind": "oversize_witness", "witness": w.to_string()})
        }
    };
    Ok(CommandOutput {
        subcommand: "decompose",
        config: json!({
            "input": args.input,
            "r": r.to_string(),
            "q_cap": params.q_cap.describe(),
        }),
        result: json!({
            "params": {"r": r.to_string(), "q_cap_lo": q_lo, "q_cap_hi": q_hi, "n": family.degree()},
            "branches": branches,
            "branch_count": dec.branches.len(),
            "remainder_size": dec.remainder.len(),
            "stop_reason": stop,
            "selection_rule": permdiv_core::spread::SELECTION_RULE,
            "input_intersecting": dec.input_intersecting,
            "bases_intersecting_reported": dec.bases_intersecting,
        }),
        text_override: None,
        post_failure: None,
    })
}

fn run_compress(cli: &Cli, args: &CompressArgs) -> CliResult<CommandOutput> {
    let family = read_partial_family(&args.input)?;
    let out = compress(&family, args.s, &budget_of(cli)).map_err(Failure::from)?;
    let text = serialize_partial_family(&out);
    let summary = format!(
        "# compress: s={} input_size={} output_size={}\n{text}",
        args.s,
        family.len(),
        out.len()
    );
    Ok(CommandOutput {
        subcommand: "compress",
        config: json!({"input": args.input, "s": args.s}),
        result: json!({
            "input_size": family.len(),
            "output_size": out.len(),
            "family_text": text,
        }),
        text_override: Some(summary),
        post_failure: None,
    })
}

fn run_cascade(cli: &Cli, args: &CascadeArgs) -> CliResult<CommandOutput> {
    let family = read_partial_family(&args.input)?;
    let q_int = match args.q_int {
        Some(q) => q,
        None => permdiv_core::bounds::q_floor(family.degree() as u64, DEFAULT_PRECISION_CAP)
            .map_err(Failure::from)? as usize,
    };
    let CascadeResult {
        layers,
        residue,
        classification,
        layer_bounds,
        detection_rule,
    } = basis_cascade(&family, q_int, &budget_of(cli)).map_err(Failure::from)?;
    let layer_values: Vec<Value> = layer_bounds
        .iter()
        .map(|l| {
            json!({
                "uniformity": l.uniformity,
                "size": l.size,
                "bound": l.bound.to_string(),
            })
        })
        .collect();
    let classification_value = match &classification {
        TwoUniformClass::Star { center } => json!({"kind": "star", "center": center.to_string()}),
        TwoUniformClass::Triangle { cells } => json!({
            "kind": "triangle",
            "cells": cells.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }),
        TwoUniformClass::Other { note } => json!({"kind": "other", "note": note}),
    };
    let _ = layers;
    Ok(CommandOutput {
        subcommand: "cascade",
        config: json!({"input": args.input, "q_int": q_int}),
        result: json!({
            "q_int": q_int,
            "layers": layer_values,
            "residue_size": residue.len(),
            "residue_text": serialize_partial_family(&residue),
            "classification": classification_value,
            "detection_rule": detection_rule,
        }),
        text_override: None,
        post_failure: None,
    })
}

fn certificate_value(r: &CertificateReport) -> Value {
    serde_json::to_value(r).expect("serializable report")
}

fn run_verify_bounds(args: &VerifyBoundsArgs) -> CliResult<CommandOutput> {
    let cap = precision_cap(args.precision);
    let mut reports: Vec<CertificateReport> = Vec::new();
    for &n in &args.n {
        reports.extend(check_decomposition_bounds(n, cap).map_err(Failure::from)?);
        reports.extend(check_diversity_chain(n, cap).map_err(Failure::from)?);
    }
    let mut derangement_values: Vec<Value> = Vec::new();
    if let Some(max_m) = args.derangements {
        for m in 1..=max_m {
            let floor = derangement_floor(m, cap).map_err(Failure::from)?;
            let rec = derangement_big(m);
            derangement_values.push(json!({
                "m": m,
                "floor_formula": floor.to_string(),
                "recurrence": rec.to_string(),
                "identity_holds": floor == rec,
            }));
        }
    }
    let any_refuted = reports.iter().any(|r| r.verdict == Verdict::Refuted);
    let any_undecided = reports.iter().any(|r| r.verdict == Verdict::Undecided)
        || derangement_values
            .iter()
            .any(|v| v["identity_holds"] == json!(false));
    let post_failure = if any_refuted {
        Some(Failure {
            code: EXIT_INVARIANT,
            msg: "a certificate was refuted".into(),
        })
    } else if any_undecided {
        Some(Failure {
            code: EXIT_HYPOTHESIS,
            msg: "some certificates are undecided".into(),
        })
    } else {
        None
    };
    Ok(CommandOutput {
        subcommand: "verify-bounds",
        config: json!({"n": args.n, "precision_cap": cap}),
        result: json!({
            "certificates": reports.iter().map(certificate_value).collect::<Vec<_>>(),
            "derangement_identity": derangement_values,
            "all_proved": !reports.is_empty() && post_failure.is_none(),
        }),
        text_override: None,
        post_failure,
    })
}

fn estimate_value(r: &EstimateReport, experiment: &str) -> Value {
    let (se_lo, se_hi) = r.stderr.endpoint_strings();
    let bound = r.bound.as_ref().map(|b| {
        let (lo, hi) = b.endpoint_strings();
        json!({"lo": lo, "hi": hi})
    });
    json!({
        "experiment": experiment,
        "successes": r.successes,
        "trials": r.trials,
        "estimate": r.estimate.to_string(),
        "stderr_lo": se_lo,
        "stderr_hi": se_hi,
        "bound": bound,
        "bound_vacuous": r.bound_vacuous,
        "p_effective": r.p_effective.to_string(),
        "p_clamped": r.p_clamped,
        "lemma_consistent": r.lemma_consistent,
        "generator": r.generator,
        "seed": r.seed,
    })
}

fn run_montecarlo(cli: &Cli, args: &MonteCarloArgs) -> CliResult<CommandOutput> {
    let family = read_perm_family(&args.input)?;
    let workers = workers_of(cli);
    let probability = match &args.p {
        Some(text) => {
            let r = parse_rational(text)?;
            Probability::from_rational(&r).map_err(Failure::from)?
        }
        None => Probability::half(),
    };
    let cfg =
        TrialConfig::new(probability, args.trials, args.seed, workers).map_err(Failure::from)?;
    let (report, name) = match args.experiment {
        Experiment::Cover => (
            estimate_cover_probability(&family, &cfg).map_err(Failure::from)?,
            "cover",
        ),
        Experiment::Split => (
            disjoint_split_experiment(&family, &cfg).map_err(Failure::from)?,
            "split",
        ),
        Experiment::Lemma => {
            let need = |o: &Option<String>, w: &str| {
                o.clone()
                    .ok_or_else(|| input_error(format!("--{w} is required for the lemma experiment")))
            };
            let r = parse_rational(&need(&args.r, "r")?)?;
            let delta = parse_rational(&need(&args.delta, "delta")?)?;
            let m = parse_rational(&need(&args.m, "m")?)?;
            (
                verify_spread_lemma(&family, &r, &delta, &m, &cfg).map_err(Failure::from)?,
                "lemma",
            )
        }
    };
    Ok(CommandOutput {
        subcommand: "montecarlo",
        config: json!({
            "input": args.input,
            "experiment": name,
            "p": args.p,
            "trials": args.trials,
            "seed": args.seed,
            "r": args.r,
            "delta": args.delta,
            "m": args.m,
        }),
        result: estimate_value(&report, name),
        text_override: None,
        post_failure: None,
    })
}

fn run_search(args: &SearchArgs) -> CliResult<CommandOutput> {
    let result = match args.mode {
        Mode::Exact => exact_max_diversity(args.n).map_err(Failure::from)?,
        Mode::Heuristic => {
            local_search_max_diversity(args.n, args.iterations, args.seed).map_err(Failure::from)?
        }
    };
    let mode = match result.mode {
        SearchMode::Exact => "exact",
        SearchMode::Heuristic => "heuristic",
    };
    let family_text = serialize_perm_family(&result.best_family);
    let summary = format!(
        "# search: mode={mode} n={} best_gamma={} raw_gamma={} closed_gamma={} iterations={} seed={}\n{family_text}",
        args.n,
        result.best_gamma,
        result.raw_gamma,
        result.closed_gamma,
        result.iterations,
        result.seed,
    );
    Ok(CommandOutput {
        subcommand: "search",
        config: json!({
            "n": args.n,
            "mode": mode,
            "iterations": args.iterations,
            "seed": args.seed,
        }),
        result: json!({
            "mode": mode,
            "n": args.n,
            "best_gamma": result.best_gamma,
            "raw_gamma": result.raw_gamma,
            "closed_gamma": result.closed_gamma,
            "best_size": result.best_family.len(),
            "iterations": result.iterations,
            "seed": result.seed,
            "family_text": family_text,
        }),
        text_override: Some(summary),
        post_failure: None,
    })
}
