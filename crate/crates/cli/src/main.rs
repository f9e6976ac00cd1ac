//! `qgame`: run Maker-Breaker games on K^Q, verify traces, extract clique
//! certificates, and exercise the Ramsey tools.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgame_core::analysis::{
    check_certificate, extract_clique, max_mono_clique_prefix, mono_dense_subset, pair_disjointness,
    verify_maker_strategy, verify_pairing, verify_trace, AllBlue, AllRed, CliqueCertificate, Colour, DenominatorParity,
    ExtractOptions, Report, VertexColouring,
};
use qgame_core::breaker::{strategy_by_id, PAIRING_ID};
use qgame_core::dense::{DEFAULT_SCAN_LIMIT, DEFAULT_STEP_LIMIT};
use qgame_core::engine::{config_digest, replay};
use qgame_core::maker::{MakerConfig, Q_STRATEGY_ID};
use qgame_core::stream::DEFAULT_OCCURRENCE_LIMIT;
use qgame_core::{run_game, Partition, Rational, Trace, UniversalStream};

use crate::config::Defaults;

#[derive(Parser)]
#[command(name = "qgame", version, about = "Maker-Breaker games on the complete graph over the rationals")]
struct Cli {
    /// key=value file supplying defaults for unset flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a game and write its trace.
    Play(PlayArgs),
    /// Run verifiers over a trace.
    Verify(VerifyArgs),
    /// Extract a clique certificate from a q-strategy trace.
    Extract(ExtractArgs),
    /// Index colouring maxima and monochromatic dense subsets.
    Ramsey(RamseyArgs),
    /// Inspect the isomorphism behind the partition.
    Iso(IsoArgs),
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long)]
    maker: Option<String>,
    #[arg(long)]
    breaker: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    turns: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trace path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the first N terms of the universal sequence to stderr.
    #[arg(long, value_name = "N")]
    dump_stream: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Comma list from legality, maker, pairing, disjointness, certificates.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Number of pairs for the disjointness check.
    #[arg(long)]
    bound: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    threshold: Option<usize>,
    /// Search nodes before the best clique so far is returned.
    #[arg(long)]
    node_budget: Option<usize>,
    /// Write the trace with the certificate appended.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "mode")]
struct RamseyMode {
    /// Largest blue and red cliques among e_1..e_n.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    prefix: Option<u64>,
    /// all-blue, all-red, or denominator-parity.
    #[arg(long, value_name = "ORACLE")]
    dense_subset: Option<String>,
}

#[derive(Args)]
struct RamseyArgs {
    #[command(flatten)]
    mode: RamseyMode,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Members scanned per class.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct IsoArgs {
    /// Print the first N matched pairs.
    #[arg(long, value_name = "N")]
    count: Option<usize>,
    /// Print the domain pair and class of a rational in (0,1).
    #[arg(long, value_name = "Q", allow_hyphen_values = true)]
    backward: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure::Runtime(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Defaults::load(cli.config.as_deref()).map_err(usage).and_then(|d| match cli.command {
        Command::Play(a) => cmd_play(a, &d),
        Command::Verify(a) => cmd_verify(a, &d),
        Command::Extract(a) => cmd_extract(a, &d),
        Command::Ramsey(a) => cmd_ramsey(a, &d),
        Command::Iso(a) => cmd_iso(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

/// Frozen strategy ingredients. `KQ_CACHE_LIMIT` caps the partition memo.
fn maker_config(d: &Defaults) -> Result<MakerConfig, Failure> {
    let steps = match std::env::var("KQ_CACHE_LIMIT") {
        Ok(v) => v.parse().map_err(|_| usage(format!("KQ_CACHE_LIMIT={v:?} is not an integer")))?,
        Err(_) => DEFAULT_STEP_LIMIT,
    };
    let occurrence_limit = d.pick(None, "occurrence_limit", Some(DEFAULT_OCCURRENCE_LIMIT)).map_err(usage)?.unwrap();
    Ok(MakerConfig {
        partition: Partition::new(steps, DEFAULT_SCAN_LIMIT),
        stream: UniversalStream::new(),
        occurrence_limit,
    })
}

fn read_trace(path: &Path) -> Result<(String, Trace), Failure> {
    let text = fs::read_to_string(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))?;
    let trace = Trace::parse(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok((text, trace))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| runtime(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| runtime(e.to_string())),
    }
}

fn cmd_play(a: PlayArgs, d: &Defaults) -> Outcome {
    let maker_id = d.pick(a.maker, "maker", Some(Q_STRATEGY_ID.to_string())).map_err(usage)?.unwrap();
    let breaker_id = d.pick(a.breaker, "breaker", Some("random".to_string())).map_err(usage)?.unwrap();
    let turns = d.pick(a.turns, "turns", Some(1000)).map_err(usage)?.unwrap();
    let seed = d.pick(a.seed, "seed", Some(0)).map_err(usage)?.unwrap();
    let out: Option<PathBuf> = d.pick(a.out, "out", None).map_err(usage)?;
    if turns == 0 {
        return Err(usage("turns must be positive"));
    }
    let cfg = maker_config(d)?;
    if let Some(n) = a.dump_stream {
        let terms: Vec<String> = cfg.stream.prefix(n).iter().map(u32::to_string).collect();
        eprintln!("stream {}", terms.join(" "));
    }
    let mut maker = strategy_by_id(&maker_id, &cfg).map_err(|e| usage(e.to_string()))?;
    let mut breaker = strategy_by_id(&breaker_id, &cfg).map_err(|e| usage(e.to_string()))?;
    match run_game(maker.as_mut(), breaker.as_mut(), turns, seed) {
        Ok((trace, _)) => {
            write_out(out.as_deref(), &trace.to_text())?;
            Ok(true)
        }
        Err(abort) => {
            write_out(out.as_deref(), &abort.trace.to_text())?;
            Err(runtime(abort.to_string()))
        }
    }
}

const CHECKS: &[&str] = &["legality", "maker", "pairing", "disjointness", "certificates"];

fn cmd_verify(a: VerifyArgs, d: &Defaults) -> Outcome {
    let explicit = a.checks.is_some();
    let checks = a.checks.unwrap_or_else(|| CHECKS.iter().map(|s| s.to_string()).collect());
    if let Some(bad) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(usage(format!("unknown check {bad:?}; expected one of {}", CHECKS.join(", "))));
    }
    let wants = |name: &str| checks.iter().any(|c| c == name);
    let needs_trace = checks.iter().any(|c| c != "disjointness");
    let trace = match (&a.input, needs_trace) {
        (Some(p), _) => Some(read_trace(p)?),
        (None, true) => return Err(usage("--in is required for trace checks")),
        (None, false) => None,
    };
    let cfg = maker_config(d)?;
    let mut sections: Vec<(&str, Report)> = Vec::new();
    if let Some((text, trace)) = &trace {
        if wants("legality") {
            let mut r = verify_trace(text).map_err(|e| runtime(e.to_string()))?;
            if let Err(e) = replay(trace) {
                r.violation(format!("replay: {e}"));
            }
            check_digest(trace, &cfg, &mut r);
            sections.push(("legality", r));
        }
        let is_q = trace.header.maker == Q_STRATEGY_ID;
        if wants("maker") && (is_q || explicit) {
            let replay = verify_maker_strategy(trace, &cfg).map_err(|e| usage(e.to_string()))?;
            sections.push(("maker", replay.report));
        }
        if wants("pairing") && (trace.header.breaker == PAIRING_ID || explicit) {
            sections.push(("pairing", verify_pairing(trace).map_err(|e| usage(e.to_string()))?));
        }
        if wants("certificates") && (!trace.certificates.is_empty() || explicit) {
            sections.push(("certificates", check_certificates(trace, &cfg)));
        }
    }
    if wants("disjointness") {
        let bound = d.pick(a.bound, "bound", Some(10_000)).map_err(usage)?.unwrap();
        if bound == 0 {
            return Err(usage("bound must be positive"));
        }
        sections.push(("disjointness", pair_disjointness(bound)));
    }
    let mut all = Report::new();
    for (_, r) in &sections {
        all.violations.extend(r.violations.iter().cloned());
    }
    println!("{}", all.verdict());
    for (name, r) in &sections {
        println!("== {name}");
        print!("{r}");
    }
    Ok(all.is_ok())
}

/// The header digest must match the strategies it names, when they are known.
fn check_digest(trace: &Trace, cfg: &MakerConfig, r: &mut Report) {
    let h = &trace.header;
    let (Ok(m), Ok(b)) = (strategy_by_id(&h.maker, cfg), strategy_by_id(&h.breaker, cfg)) else {
        r.note("strategies unknown to this build; digest not checked");
        return;
    };
    let expected = config_digest(&m.descriptor(), &b.descriptor(), h.turns, h.seed);
    if expected != h.digest {
        r.violation(format!("header digest {} does not match the configuration ({expected})", h.digest));
    }
}

fn check_certificates(trace: &Trace, cfg: &MakerConfig) -> Report {
    let mut r = Report::new();
    let state = match replay(trace) {
        Ok(s) => s,
        Err(e) => {
            r.violation(format!("cannot replay the trace: {e}"));
            return r;
        }
    };
    for (i, text) in trace.certificates.iter().enumerate() {
        match CliqueCertificate::parse(text) {
            Ok(cert) => {
                let mut c = check_certificate(&cert, &state, &cfg.partition);
                c.violations.iter_mut().for_each(|v| *v = format!("certificate {}: {v}", i + 1));
                r.note(format!("certificate {}: m={} threshold={}", i + 1, cert.m(), cert.threshold));
                r.merge(c);
            }
            Err(e) => r.violation(format!("certificate {}: {e}", i + 1)),
        }
    }
    if trace.certificates.is_empty() {
        r.note("no certificates");
    }
    r
}

fn cmd_extract(a: ExtractArgs, d: &Defaults) -> Outcome {
    let (_, mut trace) = read_trace(&a.input)?;
    if trace.header.maker != Q_STRATEGY_ID {
        return Err(usage(format!("extraction needs a {Q_STRATEGY_ID} trace, found maker={}", trace.header.maker)));
    }
    let def = ExtractOptions::default();
    let opts = ExtractOptions {
        m_max: d.pick(a.m_max, "m_max", Some(def.m_max)).map_err(usage)?.unwrap(),
        threshold: d.pick(a.threshold, "threshold", Some(def.threshold)).map_err(usage)?.unwrap(),
        node_budget: d.pick(a.node_budget, "node_budget", Some(def.node_budget)).map_err(usage)?.unwrap(),
    };
    if opts.m_max == 0 || opts.threshold == 0 {
        return Err(usage("m-max and threshold must be positive"));
    }
    let state = replay(&trace).map_err(|e| runtime(e.to_string()))?;
    let cfg = maker_config(d)?;
    let cert = extract_clique(&state, &cfg.partition, opts).map_err(|e| runtime(e.to_string()))?;
    let report = check_certificate(&cert, &state, &cfg.partition);
    println!("m={}", cert.m());
    print!("{}", cert.to_text());
    if !report.is_ok() {
        print!("{report}");
        return Ok(false);
    }
    if let Some(out) = a.out {
        trace.certificates.push(cert.to_text());
        write_out(Some(&out), &trace.to_text())?;
    }
    Ok(cert.m() >= 1)
}

fn oracle_by_name(name: &str) -> Option<Box<dyn VertexColouring>> {
    match name {
        "all-blue" => Some(Box::new(AllBlue)),
        "all-red" => Some(Box::new(AllRed)),
        "denominator-parity" => Some(Box::new(DenominatorParity)),
        _ => None,
    }
}

fn cmd_ramsey(a: RamseyArgs, d: &Defaults) -> Outcome {
    if let Some(n) = a.mode.prefix {
        println!("blue={}", max_mono_clique_prefix(n, Colour::Blue));
        println!("red={}", max_mono_clique_prefix(n, Colour::Red));
        return Ok(true);
    }
    let name = a.mode.dense_subset.expect("clap enforces one mode");
    let oracle = oracle_by_name(&name)
        .ok_or_else(|| usage(format!("unknown oracle {name:?}; expected all-blue, all-red, or denominator-parity")))?;
    let budget = d.pick(a.budget, "budget", Some(1000)).map_err(usage)?.unwrap();
    let partition = maker_config(d)?.partition;
    match mono_dense_subset(oracle.as_ref(), &partition, a.count as usize, budget)
        .map_err(|e| runtime(e.to_string()))?
    {
        Ok(sub) => {
            println!("{} colour={} count={} oracle={}", sub.case.tag(), sub.colour, sub.elements.len(), oracle.name());
            for (e, c) in sub.elements.iter().zip(&sub.classes) {
                println!("{e} class={c}");
            }
            Ok(true)
        }
        Err(inc) => {
            println!("{inc}");
            Ok(false)
        }
    }
}

fn cmd_iso(a: IsoArgs) -> Outcome {
    if a.count.is_none() && a.backward.is_none() {
        return Err(usage("iso needs --count or --backward"));
    }
    let partition = Partition::default();
    if let Some(n) = a.count {
        let prefix = partition.matched_prefix(n).map_err(|e| runtime(e.to_string()))?;
        for (k, ((x, y), r)) in prefix.iter().enumerate() {
            println!("{} ({x}, {y}) {r}", k + 1);
        }
    }
    if let Some(text) = a.backward {
        let r: Rational = text.parse().map_err(|e| usage(format!("{text:?}: {e}")))?;
        if !r.in_unit_interval() {
            return Err(usage(format!("{r} is not in (0,1)")));
        }
        let (x, y) = partition.iso_backward(&r).map_err(|e| runtime(e.to_string()))?;
        println!("{r} ({x}, {y}) class={x}");
    }
    Ok(true)
}
