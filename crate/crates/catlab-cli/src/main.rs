//! Command-line front end: run machines on words, compile between machine
//! families, check machines against oracles, build and render
//! synchronization components, and convert stored traces.
//!
//! Exit codes: 0 success, 1 semantic rejection or counterexample, 2 usage or
//! validation error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use catlab::bridge;
use catlab::builtins;
use catlab::dpdt;
use catlab::engine::{
    self, cat_run, default_step_cap, iat_run, parse_word, RunTrace, RunnableCat, RunnableIat,
};
use catlab::fssp::{self, SyncVariant};
use catlab::harness::{self, Machine};
use catlab::machine::{Rational, TimeComplexity};
use catlab::sfst;
use catlab::{parse_machine, serialize_machine, MachineSpec};

#[derive(Parser)]
#[command(name = "catlab", about = "Cellular automaton transducer workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a machine on an input word and print acceptance, output, and times.
    Run(RunArgs),
    /// Compile a machine into a CAT (or a CAT into an IAT).
    Compile(CompileArgs),
    /// Exhaustively compare a machine against an oracle.
    Check(CheckArgs),
    /// Build a synchronization component and report its firing time.
    Sync(SyncArgs),
    /// Convert a stored trace to text or SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Builtin machine name (copy, sort, reverse, square_marker).
    #[arg(long, conflicts_with = "machine")]
    builtin: Option<String>,
    /// Machine document path.
    #[arg(long)]
    machine: Option<PathBuf>,
    /// Input word (split per character when all symbols are single characters).
    #[arg(long)]
    input: String,
    /// Step cap override (default 4n + 16).
    #[arg(long)]
    step_cap: Option<usize>,
    /// Write the line-oriented trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the space-time diagram to this file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    /// Source kind.
    #[arg(long)]
    from: SourceKind,
    /// Source machine document.
    input: PathBuf,
    /// Output path for the compiled machine document.
    #[arg(short, long)]
    output: PathBuf,
    /// Source acceptance bound (iat only): rt or lt:<num>[/<den>].
    #[arg(long, default_value = "rt")]
    ti: String,
    /// Source output bound (iat only): rt or lt:<num>[/<den>].
    #[arg(long, default_value = "rt")]
    to: String,
    /// Single-valuedness check bound (sfst only).
    #[arg(long, default_value_t = 10)]
    sv_check_len: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Iat,
    Cat,
    Sfst,
    Dpdt,
}

#[derive(Args)]
struct CheckArgs {
    /// Builtin machine name.
    #[arg(long, conflicts_with = "machine")]
    builtin: Option<String>,
    /// Machine document path.
    #[arg(long)]
    machine: Option<PathBuf>,
    /// copy|sort|reverse|square_marker|fst:<path>|pdt:<path>|iat:<path>|cat:<path>.
    #[arg(long)]
    oracle: String,
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SyncArgs {
    /// two-general or single-general.
    #[arg(long)]
    variant: String,
    /// Line length to demonstrate.
    #[arg(short = 'n', long)]
    cells: usize,
    /// Verify firing times exhaustively up to this length.
    #[arg(long)]
    verify: Option<usize>,
    /// Render the demonstration run: text or svg.
    #[arg(long)]
    render: Option<String>,
    /// Output path for the rendering.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// A trace file produced by `run --trace`.
    trace: PathBuf,
    /// Output format: text or svg.
    #[arg(long, default_value = "svg")]
    format: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compile(args) => cmd_compile(args),
        Command::Check(args) => cmd_check(args),
        Command::Sync(args) => cmd_sync(args),
        Command::Render(args) => cmd_render(args),
    }
}

fn load_machine(builtin: &Option<String>, path: &Option<PathBuf>) -> Result<MachineSpec> {
    match (builtin, path) {
        (Some(name), None) => {
            let spec = builtins::builtin_by_name(name).ok_or_else(|| {
                anyhow!("unknown builtin `{name}` (expected one of {:?})", builtins::BUILTIN_NAMES)
            })?;
            Ok(MachineSpec::Cat(spec.clone()))
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_machine(&text)?)
        }
        _ => bail!("exactly one of --builtin or --machine is required"),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let spec = load_machine(&args.builtin, &args.machine)?;
    let trace = match &spec {
        MachineSpec::Cat(cat) => {
            let word = parse_word(&args.input, &cat.input_alphabet);
            let runnable = RunnableCat::new(cat).map_err(|e| anyhow!("invalid machine: {e}"))?;
            let cap = args.step_cap.unwrap_or_else(|| default_step_cap(word.len()));
            cat_run(&runnable, &word, cap)?
        }
        MachineSpec::Iat(iat) => {
            let word = parse_word(&args.input, &iat.input_alphabet);
            let runnable = RunnableIat::new(iat).map_err(|e| anyhow!("invalid machine: {e}"))?;
            let cap = args.step_cap.unwrap_or_else(|| default_step_cap(word.len()));
            iat_run(&runnable, &word, cap)?
        }
        MachineSpec::Seq(_) => {
            bail!("sequential transducers run through oracles; compile them first")
        }
    };
    if let Some(path) = &args.trace {
        fs::write(path, trace.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.svg {
        fs::write(path, engine::svg::render_svg(&trace))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let fmt = |v: Option<usize>| v.map_or("-".to_string(), |t| t.to_string());
    println!("accepted: {} (t_i = {})", trace.accept_time.is_some(), fmt(trace.accept_time));
    println!(
        "output complete: {} (t_o = {})",
        trace.output_complete_time.is_some(),
        fmt(trace.output_complete_time)
    );
    match &trace.final_output {
        Some(v) => {
            println!("output: {v}");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!(
                "no transduction ({})",
                if trace.complete { "rejected" } else { "incomplete at the step cap" }
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn parse_bound(text: &str) -> Result<TimeComplexity> {
    if text == "rt" {
        return Ok(TimeComplexity::real_time());
    }
    if let Some(rest) = text.strip_prefix("lt:") {
        let (num, den) = match rest.split_once('/') {
            Some((n, d)) => (n.parse()?, d.parse()?),
            None => (rest.parse()?, 1),
        };
        return Ok(TimeComplexity::linear(Rational::new(num, den)));
    }
    bail!("time bound must be `rt` or `lt:<num>[/<den>]`, got `{text}`")
}

fn cmd_compile(args: CompileArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let source = parse_machine(&text)?;
    let compiled = match (args.from, source) {
        (SourceKind::Iat, MachineSpec::Iat(iat)) => {
            let ti = parse_bound(&args.ti)?;
            let to = parse_bound(&args.to)?;
            MachineSpec::Cat(bridge::compile_iat_to_cat(&iat, ti, to)?)
        }
        (SourceKind::Cat, MachineSpec::Cat(cat)) => {
            MachineSpec::Iat(bridge::compile_cat_to_iat(&cat)?)
        }
        (SourceKind::Sfst, MachineSpec::Seq(seq)) => MachineSpec::Cat(sfst::compile_sfst_to_cat(
            &seq,
            sfst::SfstOptions { sv_check_len: args.sv_check_len },
        )?),
        (SourceKind::Dpdt, MachineSpec::Seq(seq)) => {
            let (cat, report) = dpdt::compile_dpdt_to_cat(&seq)?;
            println!(
                "constants: k1 = {}, k2 = {}, k = {}; output factor c = {}",
                report.constants.k1, report.constants.k2, report.constants.k, report.output_factor
            );
            MachineSpec::Cat(cat)
        }
        _ => bail!("source document does not match --from"),
    };
    fs::write(&args.output, serialize_machine(&compiled))
        .with_context(|| format!("writing {}", args.output.display()))?;
    let (states, rules) = match &compiled {
        MachineSpec::Cat(c) => (c.states.len(), c.delta.len()),
        MachineSpec::Iat(i) => (i.states.len(), i.delta_interior.len() + i.delta_comm.len()),
        MachineSpec::Seq(_) => unreachable!(),
    };
    println!("compiled: {states} states, {rules} rules -> {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

type OracleFn = Box<dyn Fn(&[String]) -> Result<Option<String>, harness::HarnessError>>;

fn parse_oracle(text: &str) -> Result<OracleFn> {
    if let Some(f) = harness::oracle_function(text) {
        return Ok(Box::new(move |w: &[String]| Ok(f(&harness::join_word(w)))));
    }
    let (kind, path) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("oracle must be a builtin name or kind:path, got `{text}`"))?;
    let doc = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let spec = parse_machine(&doc)?;
    match (kind, spec) {
        ("fst", MachineSpec::Seq(seq)) => Ok(Box::new(move |w: &[String]| {
            let outs = harness::oracle_fst_all_paths(&seq, w)?;
            Ok(outs.into_iter().next())
        })),
        ("pdt", MachineSpec::Seq(seq)) => {
            Ok(Box::new(move |w: &[String]| harness::oracle_dpdt(&seq, w)))
        }
        ("cat", MachineSpec::Cat(cat)) => {
            let runnable = RunnableCat::new(&cat).map_err(|e| anyhow!("invalid oracle: {e}"))?;
            Ok(Box::new(move |w: &[String]| {
                let trace = cat_run(&runnable, w, default_step_cap(w.len())).map_err(|e| {
                    harness::HarnessError::Run(harness::join_word(w), e.to_string())
                })?;
                Ok(trace.final_output)
            }))
        }
        ("iat", MachineSpec::Iat(iat)) => {
            let runnable = RunnableIat::new(&iat).map_err(|e| anyhow!("invalid oracle: {e}"))?;
            Ok(Box::new(move |w: &[String]| {
                let trace = iat_run(&runnable, w, default_step_cap(w.len())).map_err(|e| {
                    harness::HarnessError::Run(harness::join_word(w), e.to_string())
                })?;
                Ok(trace.final_output)
            }))
        }
        _ => bail!("oracle kind `{kind}` does not match the document"),
    }
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let spec = load_machine(&args.builtin, &args.machine)?;
    let oracle = parse_oracle(&args.oracle)?;
    let (machine, alphabet) = match &spec {
        MachineSpec::Cat(cat) => (Machine::Cat(cat), cat.input_alphabet.clone()),
        MachineSpec::Iat(iat) => (Machine::Iat(iat), iat.input_alphabet.clone()),
        MachineSpec::Seq(_) => bail!("check a compiled machine, not a sequential transducer"),
    };
    let note = args
        .builtin
        .as_deref()
        .filter(|name| *name == "square_marker")
        .map(|_| "acceptance relaxed to 2n for this builtin (output stays rt)".to_string());
    let report = harness::equiv_check_with_note(machine, &*oracle, &alphabet, args.max_len, note)?;
    print!("{report}");
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&report.to_json())?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match report.verdict {
        harness::Verdict::Pass => ExitCode::SUCCESS,
        harness::Verdict::Fail => ExitCode::from(1),
    })
}

fn cmd_sync(args: SyncArgs) -> Result<ExitCode> {
    let variant = match args.variant.as_str() {
        "two-general" => SyncVariant::TwoGeneral,
        "single-general" => SyncVariant::SingleGeneral,
        other => bail!("unknown variant `{other}` (two-general or single-general)"),
    };
    let bound = fssp::DEFAULT_SYNC_CELLS.max(args.cells.max(args.verify.unwrap_or(0)));
    let component = fssp::build_sync_with(variant, bound);
    println!(
        "{} component: fires {} cells at step {}",
        args.variant,
        args.cells,
        component.fire_time(args.cells)
    );
    if let Some(n_max) = args.verify {
        let report = fssp::verify_sync(&component, n_max);
        if report.is_empty() {
            println!("verified exact simultaneous firing for every n in 1..={n_max}");
        } else {
            for v in &report {
                println!("n = {}: {}", v.n, v.detail);
            }
            return Ok(ExitCode::from(1));
        }
    }
    if let Some(format) = &args.render {
        let cat = RunnableCat::new(&component.spec).map_err(|e| anyhow!("{e}"))?;
        let word = component.word_for(args.cells);
        let trace = cat_run(&cat, &word, component.fire_time(args.cells).max(1) + 2)?;
        let rendered = match format.as_str() {
            "svg" => engine::svg::render_svg(&trace),
            "text" => trace.to_text(),
            other => bail!("unknown render format `{other}`"),
        };
        match &args.out {
            Some(path) => {
                fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{rendered}"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let trace = parse_trace(&text)?;
    let rendered = match args.format.as_str() {
        "svg" => engine::svg::render_svg(&trace),
        "text" => trace.to_text(),
        other => bail!("unknown render format `{other}`"),
    };
    match &args.output {
        Some(path) => {
            fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// Parses the line-oriented trace format back into a renderable trace.
fn parse_trace(text: &str) -> Result<RunTrace> {
    let mut names: Vec<String> = Vec::new();
    let mut steps = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, " | ");
        let _t: usize =
            parts.next().unwrap_or_default().trim().parse().context("step number")?;
        let states = parts.next().ok_or_else(|| anyhow!("missing state column"))?;
        let outputs = parts.next().unwrap_or_default();
        let cells: Vec<u32> = states
            .split_whitespace()
            .map(|s| {
                if let Some(i) = names.iter().position(|n| n == s) {
                    i as u32
                } else {
                    names.push(s.to_string());
                    (names.len() - 1) as u32
                }
            })
            .collect();
        let outputs: Vec<Option<std::sync::Arc<str>>> = outputs
            .split_whitespace()
            .map(|s| {
                if s == "⊥" {
                    None
                } else {
                    Some(std::sync::Arc::from(s.trim_matches(['[', ']'])))
                }
            })
            .collect();
        steps.push((cells, outputs));
    }
    if steps.is_empty() {
        bail!("trace holds no steps");
    }
    Ok(RunTrace::from_parts(names, steps))
}
