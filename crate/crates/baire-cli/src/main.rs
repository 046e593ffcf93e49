//! Command-line front door for the continuity toolkit.
//!
//! Verbs take JSON artifacts (inline or `@`-style file paths), run one
//! engine operation, and print a single-line JSON report to stdout.
//! Reports are deterministic: the same invocation produces byte-identical
//! output.
//!
//! Exit codes: 0 success, 1 a checked property is violated, 2 malformed
//! input or an input that does not support the requested operation, 3 a
//! fuel or cutoff budget ran out.

use std::fmt;
use std::fs;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use baire::brouwer::{BarGroup, BarItem, BarOptions, BrouwerOp, Constancy, ContinuousFn, Eval};
use baire::fan::{self, CBar, FanSpec, FanTree};
use baire::formal::{check_cover, CovWitness, CoverCheck, FormalMap};
use baire::seq::{DecidableSet, FinSeq, Point};
use baire::testkit::{gen_points, scan_neighbourhood_law};
use baire::{Cutoff, Error, DEFAULT_FUEL, DEFAULT_SEARCH_DEPTH};

/// Environment variable overriding the default evaluation fuel.
const FUEL_ENV: &str = "BAIRE_FUEL";

#[derive(Parser)]
#[command(
    name = "baire",
    version,
    about = "Continuity certificates on Baire space: evaluate, enumerate, convert, check"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an operation at a point.
    Eval(EvalArgs),
    /// List the bar of an operation.
    Bar(BarArgs),
    /// Uniform continuity modulus of a realised function over a fan.
    Modulus(ModulusArgs),
    /// Convert between operations, cover witnesses, and maps.
    Convert(ConvertArgs),
    /// Run invariant checks against an artifact.
    Check(CheckArgs),
    /// Query c-bar membership at addresses.
    Cbar(CbarArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Operation JSON, inline or a file path.
    #[arg(long)]
    op: String,
    /// Point JSON, inline or a file path.
    #[arg(long)]
    point: String,
    /// Evaluation depth budget (default 10000, env BAIRE_FUEL).
    #[arg(long)]
    fuel: Option<usize>,
}

#[derive(Args)]
struct BarArgs {
    #[arg(long)]
    op: String,
    /// Expansion width per node.
    #[arg(long, default_value_t = 4)]
    cutoff: u64,
    /// Maximum number of listed addresses.
    #[arg(long, default_value_t = 100)]
    limit: usize,
    #[arg(long)]
    fuel: Option<usize>,
    /// Also list the bar as finitely many groups (tabular operations).
    #[arg(long)]
    grouped: bool,
}

#[derive(Args)]
struct ModulusArgs {
    #[arg(long)]
    op: String,
    /// Fan spec JSON, inline or a file path.
    #[arg(long)]
    fan: String,
    /// Depth budget for the modulus search.
    #[arg(long, default_value_t = DEFAULT_SEARCH_DEPTH)]
    depth_budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Cov,
    Map,
    Brouwer,
}

#[derive(Args)]
struct ConvertArgs {
    /// Target artifact kind.
    #[arg(long, value_enum)]
    to: Target,
    /// Source artifact JSON (operation, cover witness, or map); the kind
    /// is recognized from its fields.
    #[arg(long)]
    input: String,
    /// Root address for operation-to-cover conversion.
    #[arg(long)]
    root: Option<String>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("subject").required(true).args(["op", "map", "cover"])))]
struct CheckArgs {
    /// Check the neighbourhood-function laws of an operation.
    #[arg(long)]
    op: Option<String>,
    /// Check the map axioms of a tabulated formal map.
    #[arg(long)]
    map: Option<String>,
    /// Check a cover certificate: {"a":[...],"u":[[...]],"witness":{...}}.
    #[arg(long)]
    cover: Option<String>,
    /// Seed for sampled points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sampled points.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Expansion width for witness listings.
    #[arg(long, default_value_t = 4)]
    cutoff: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CbarSourceKind {
    /// delta is the operation's neighbourhood function clipped to 0 or 1.
    Operation,
    /// delta is the value of the function the operation realises.
    Function,
}

#[derive(Args)]
struct CbarArgs {
    #[arg(long)]
    op: String,
    /// How to read the operation as a c-bar.
    #[arg(long, value_enum, default_value_t = CbarSourceKind::Operation)]
    source: CbarSourceKind,
    /// Address JSON (repeatable).
    #[arg(long = "at", required = true)]
    at: Vec<String>,
    /// Probe width for bounded membership queries.
    #[arg(long, default_value_t = 4)]
    cutoff: u64,
}

enum CliError {
    Engine(Error),
    Json { what: &'static str, err: serde_json::Error },
    Io { path: String, err: std::io::Error },
    Input(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Json { what, err } => write!(f, "malformed {what}: {err}"),
            CliError::Io { path, err } => write!(f, "cannot read {path}: {err}"),
            CliError::Input(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            // budget exhaustion is its own signal
            CliError::Engine(Error::FuelExhausted { .. })
            | CliError::Engine(Error::CutoffRequired { .. }) => 3,
            // a refuted constancy claim is a violated property, not a
            // malformed input
            CliError::Engine(Error::NotConstant { .. }) => 1,
            CliError::Engine(_) | CliError::Json { .. } | CliError::Io { .. }
            | CliError::Input(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Bar(args) => cmd_bar(args),
        Cmd::Modulus(args) => cmd_modulus(args),
        Cmd::Convert(args) => cmd_convert(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Cbar(args) => cmd_cbar(args),
    }
}

/// Inline JSON is passed through; anything else is treated as a file path.
fn read_input(s: &str) -> Result<String, CliError> {
    let trimmed = s.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.starts_with('"') {
        Ok(s.to_string())
    } else {
        fs::read_to_string(s).map_err(|err| CliError::Io { path: s.to_string(), err })
    }
}

fn parse<T: for<'de> Deserialize<'de>>(s: &str, what: &'static str) -> Result<T, CliError> {
    let text = read_input(s)?;
    serde_json::from_str(&text).map_err(|err| CliError::Json { what, err })
}

fn fuel_budget(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match std::env::var(FUEL_ENV) {
        Ok(raw) => raw
            .parse()
            .map_err(|_| CliError::Input(format!("{FUEL_ENV} must be a natural number"))),
        Err(_) => Ok(DEFAULT_FUEL),
    }
}

fn emit<T: Serialize>(report: &T) -> Result<ExitCode, CliError> {
    let line = serde_json::to_string(report)
        .map_err(|err| CliError::Json { what: "report", err })?;
    println!("{line}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, CliError> {
    let op: BrouwerOp = parse(&args.op, "operation")?;
    let point: Point = parse(&args.point, "point")?;
    let fuel = fuel_budget(args.fuel)?;
    let out: Eval = op.eval(&point, fuel).map_err(CliError::Engine)?;
    emit(&out)
}

#[derive(Serialize)]
struct BarReport {
    items: Vec<BarItem>,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<BarGroup>>,
}

fn cmd_bar(args: BarArgs) -> Result<ExitCode, CliError> {
    let op: BrouwerOp = parse(&args.op, "operation")?;
    let fuel = fuel_budget(args.fuel)?;
    let listing = op.bar(&BarOptions {
        cutoff: Some(args.cutoff),
        limit: Some(args.limit),
        fuel,
    });
    let groups = if args.grouped {
        Some(op.bar_groups().map_err(CliError::Engine)?)
    } else {
        None
    };
    emit(&BarReport { items: listing.items, truncated: listing.truncated, groups })
}

#[derive(Serialize)]
struct ModulusReport {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: u64,
}

fn cmd_modulus(args: ModulusArgs) -> Result<ExitCode, CliError> {
    let op: BrouwerOp = parse(&args.op, "operation")?;
    let spec: FanSpec = parse(&args.fan, "fan spec")?;
    let fan = FanTree::from_spec(&spec).map_err(CliError::Engine)?;
    let f = ContinuousFn::from_op(op);
    let n = fan::uniform_modulus(&f, &fan, args.depth_budget).map_err(CliError::Engine)?;
    let m = fan::modulus_m(&f, &fan, n);
    emit(&ModulusReport { n, m })
}

enum SourceKind {
    Op(BrouwerOp),
    Cov(CovWitness),
    Map(FormalMap),
}

/// Recognizes which artifact a JSON value encodes from its fields:
/// cover witnesses have "root" and "shape", maps have "witness" and
/// "values", operations have "leaf" or "sup".
fn sniff_source(input: &str) -> Result<SourceKind, CliError> {
    let text = read_input(input)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|err| CliError::Json { what: "input", err })?;
    if value.get("root").is_some() && value.get("shape").is_some() {
        return serde_json::from_value(value)
            .map(SourceKind::Cov)
            .map_err(|err| CliError::Json { what: "cover witness", err });
    }
    if value.get("witness").is_some() && value.get("values").is_some() {
        return serde_json::from_value(value)
            .map(SourceKind::Map)
            .map_err(|err| CliError::Json { what: "map table", err });
    }
    if value.get("leaf").is_some() || value.get("sup").is_some() {
        return serde_json::from_value(value)
            .map(SourceKind::Op)
            .map_err(|err| CliError::Json { what: "operation", err });
    }
    Err(CliError::Input(
        "unrecognized input: expected an operation, a cover witness, or a map table".into(),
    ))
}

fn cmd_convert(args: ConvertArgs) -> Result<ExitCode, CliError> {
    let source = sniff_source(&args.input)?;
    let root: FinSeq = match &args.root {
        Some(r) => parse(r, "root address")?,
        None => FinSeq::empty(),
    };
    match (source, args.to) {
        (SourceKind::Op(op), Target::Cov) => emit(&CovWitness::from_op(root, &op)),
        (SourceKind::Map(map), Target::Cov) => emit(map.witness()),
        (SourceKind::Cov(w), Target::Cov) => emit(&w),
        (SourceKind::Cov(w), Target::Brouwer) => emit(&w.to_op()),
        (SourceKind::Op(op), Target::Brouwer) => emit(&op),
        (SourceKind::Map(map), Target::Brouwer) => {
            let f = map.to_continuous().map_err(CliError::Engine)?;
            let op = f.realiser().expect("rebuilt functions carry their realiser").clone();
            emit(&op)
        }
        (SourceKind::Op(op), Target::Map) => {
            let f = ContinuousFn::from_op(op);
            let map = FormalMap::from_realisable(&f).map_err(CliError::Engine)?;
            emit(&map)
        }
        (SourceKind::Map(map), Target::Map) => emit(&map),
        (SourceKind::Cov(_), Target::Map) => Err(CliError::Input(
            "a cover witness carries no output values; convert an operation or a map".into(),
        )),
    }
}

#[derive(Serialize)]
struct CheckEntry {
    name: &'static str,
    construction: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct CheckReport {
    checks: Vec<CheckEntry>,
    passed: bool,
}

fn finish_checks(checks: Vec<CheckEntry>) -> Result<ExitCode, CliError> {
    let passed = checks.iter().all(|c| c.status != "fail");
    let report = CheckReport { checks, passed };
    let line = serde_json::to_string(&report)
        .map_err(|err| CliError::Json { what: "report", err })?;
    println!("{line}");
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, CliError> {
    if let Some(op) = &args.op {
        let op: BrouwerOp = parse(op, "operation")?;
        check_operation(&op, args.seed, args.samples)
    } else if let Some(map) = &args.map {
        let map: FormalMap = parse(map, "map table")?;
        check_map(&map, args.cutoff)
    } else {
        let input = args.cover.as_deref().expect("clap enforces one subject");
        check_cover_input(input, args.cutoff)
    }
}

fn check_operation(op: &BrouwerOp, seed: u64, samples: usize) -> Result<ExitCode, CliError> {
    let mut checks = Vec::new();

    // width 5 gives every default family a representative index even for
    // operations whose explicit tables are 4 wide
    let scan = scan_neighbourhood_law(op, 5, 8);
    checks.push(match scan {
        Ok(()) => CheckEntry {
            name: "extension-invariance",
            construction: "neighbourhood-law-scan",
            status: "pass",
            witness: None,
        },
        Err(v) => CheckEntry {
            name: "extension-invariance",
            construction: "neighbourhood-law-scan",
            status: "fail",
            witness: Some(serde_json::json!({
                "baseAt": v.base_at,
                "base": v.base,
                "at": v.at,
                "got": v.got,
            })),
        },
    });

    let points = gen_points(seed, samples, 6, 4);
    let mut partition_witness = None;
    let mut eval_witness = None;
    for (i, p) in points.iter().enumerate() {
        let hits: Vec<usize> =
            (0..=12).filter(|&n| op.is_bar_address(&p.initial_segment(n))).collect();
        if hits.len() != 1 && partition_witness.is_none() {
            partition_witness =
                Some(serde_json::json!({ "sample": i, "hits": hits.clone() }));
        }
        match op.eval(p, DEFAULT_FUEL) {
            Ok(out) => {
                let consistent = (0..out.modulus)
                    .all(|n| op.apply(&p.initial_segment(n)) == 0)
                    && op.apply(&p.initial_segment(out.modulus)) == out.value + 1;
                if !consistent && eval_witness.is_none() {
                    eval_witness = Some(serde_json::json!({
                        "sample": i,
                        "value": out.value,
                        "modulus": out.modulus,
                    }));
                }
            }
            Err(_) => {
                if eval_witness.is_none() {
                    eval_witness = Some(serde_json::json!({ "sample": i, "fuel": DEFAULT_FUEL }));
                }
            }
        }
    }
    checks.push(CheckEntry {
        name: "bar-partition",
        construction: "single-bar-hit-count",
        status: if partition_witness.is_none() { "pass" } else { "fail" },
        witness: partition_witness,
    });
    checks.push(CheckEntry {
        name: "eval-consistency",
        construction: "least-positive-prefix",
        status: if eval_witness.is_none() { "pass" } else { "fail" },
        witness: eval_witness,
    });
    finish_checks(checks)
}

fn check_map(map: &FormalMap, cutoff: u64) -> Result<ExitCode, CliError> {
    let report = map.validate(None, &[], Some(cutoff)).map_err(CliError::Engine)?;
    let mut checks = Vec::new();
    checks.push(CheckEntry {
        name: "map-totality",
        construction: "witness-cover-of-related-addresses",
        status: match (report.totality_failures.is_empty(), report.unverified) {
            (false, _) => "fail",
            (true, true) => "unverified",
            (true, false) => "pass",
        },
        witness: if report.totality_failures.is_empty() {
            None
        } else {
            Some(serde_json::json!({ "addresses": report.totality_failures }))
        },
    });
    checks.push(CheckEntry {
        name: "map-single-valued",
        construction: "witness-set-value-scan",
        status: if report.single_valued_failures.is_empty() { "pass" } else { "fail" },
        witness: if report.single_valued_failures.is_empty() {
            None
        } else {
            let vs: Vec<serde_json::Value> = report
                .single_valued_failures
                .iter()
                .map(|v| {
                    serde_json::json!({
                        "addr": v.address,
                        "first": v.first,
                        "second": v.second,
                    })
                })
                .collect();
            Some(serde_json::json!({ "violations": vs }))
        },
    });
    finish_checks(checks)
}

#[derive(Deserialize)]
struct CoverInput {
    #[serde(default)]
    a: FinSeq,
    u: Vec<FinSeq>,
    witness: CovWitness,
}

fn check_cover_input(input: &str, cutoff: u64) -> Result<ExitCode, CliError> {
    let cover: CoverInput = parse(input, "cover check input")?;
    let u = DecidableSet::from_listing(cover.u);
    let verdict =
        check_cover(&cover.a, &u, &cover.witness, Some(cutoff)).map_err(CliError::Engine)?;
    let (status, witness) = match verdict {
        CoverCheck::Holds => ("pass", None),
        CoverCheck::Unverified => ("unverified", None),
        CoverCheck::Fails { address } => {
            ("fail", Some(serde_json::json!({ "address": address })))
        }
    };
    finish_checks(vec![CheckEntry {
        name: "cover-certificate",
        construction: "witness-listing-inclusion",
        status,
        witness,
    }])
}

#[derive(Serialize)]
struct CbarAnswer {
    addr: FinSeq,
    member: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<FinSeq>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<FinSeq>,
}

#[derive(Serialize)]
struct CbarReport {
    answers: Vec<CbarAnswer>,
}

fn cmd_cbar(args: CbarArgs) -> Result<ExitCode, CliError> {
    let op: BrouwerOp = parse(&args.op, "operation")?;
    let cbar = match args.source {
        CbarSourceKind::Operation => CBar::from_brouwer(op),
        CbarSourceKind::Function => {
            CBar::from_function(&ContinuousFn::from_op(op)).map_err(CliError::Engine)?
        }
    };
    let cutoff = Cutoff { width: args.cutoff, ..Cutoff::default() };
    let mut answers = Vec::new();
    for raw in &args.at {
        let addr: FinSeq = parse(raw, "address")?;
        let (member, left, right) = match cbar.member(&addr, &cutoff) {
            Constancy::Constant => ("yes", None, None),
            Constancy::Differs { left, right } => ("no", Some(left), Some(right)),
            Constancy::Unverified => ("unverified", None, None),
        };
        answers.push(CbarAnswer { addr, member, left, right });
    }
    emit(&CbarReport { answers })
}
