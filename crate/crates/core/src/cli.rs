//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 dependency cone escapes
//! the known initial states, 3 a verification check failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::dynamics::{
    build_example1, check_origin_invariant_h2, check_weak_mixing_obstruction,
    cone_boundedness_probe, random_witness, recurrence_offsets, trace_period_probe,
    DEFAULT_CONE_CAP, DEFAULT_RECURRENCE_RADIUS, DEFAULT_TRACE_BUDGET,
};
use crate::engine::{evolve_exact, pgm, trace, trace_csv, EngineError};
use crate::lattice::{Cell, FillPolicy, Pattern, State, Window, WindowConfiguration};
use crate::odometer::{
    build_candidate_odometer, build_three_state_odometer, candidate_period_report, extend_to_z,
    lemma1_oracle, lemma2_oracle, pow3, verify_block_structure, verify_candidate_equivalence,
    verify_trace_period, verify_window_surjectivity,
};
use crate::rules::{load_distribution, load_rules, RuleDistribution};
use crate::spiral::{build_spiral_odometer, spiral, spiral_csv, verify_embedding_equivalence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "nuca",
    version,
    about = "Exact simulation of non-uniform cellular automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace of one cell.
    Simulate(SimulateArgs),
    /// Space-time diagram of a range of cells as a plain PGM.
    Render(RenderArgs),
    /// Run a named verification and print a JSON report.
    Verify(VerifyArgs),
    /// Finite probes: dependency closures, recurrence offsets, trace periods.
    Probe(ProbeArgs),
    /// Spiral enumeration utilities.
    Spiral {
        #[command(subcommand)]
        command: SpiralCommand,
    },
}

#[derive(Subcommand, Debug)]
enum SpiralCommand {
    /// CSV of the first `n` spiral cells with their rules.
    Export {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Builtin {
    Odometer,
    OdometerZ,
    Candidate,
    CandidateBoundary,
    Example1,
    Spiral,
}

#[derive(Args, Debug)]
struct Source {
    /// Built-in distribution.
    #[arg(long, value_enum, conflicts_with_all = ["rules", "distribution"])]
    builtin: Option<Builtin>,
    /// JSON rule set.
    #[arg(long, requires = "distribution")]
    rules: Option<PathBuf>,
    /// JSON distribution over the rule set.
    #[arg(long, requires = "rules")]
    distribution: Option<PathBuf>,
    /// `uniform:S`, `seed:N` or `pattern:FILE`.
    #[arg(long, default_value = "uniform:0")]
    init: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Cell as `x` or `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    cell: String,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    source: Source,
    /// Inclusive range `A:B`; spiral indices for the spiral builtin.
    #[arg(long, allow_hyphen_values = true)]
    cells: String,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "pgm")]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    OdometerPeriod,
    OdometerBlocks,
    OdometerSurjectivity,
    Lemma1,
    Lemma2,
    SpiralEquivalence,
    Example1Witness,
    Example1H2,
    CandidateEquivalence,
    CandidatePeriod,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    check: Check,
    #[arg(long)]
    xmax: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Number of random initial configurations.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Base seed for random samples.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProbeKind {
    Cones,
    Recurrence,
    Periods,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(value_enum)]
    kind: ProbeKind,
    #[arg(long, value_enum)]
    builtin: Builtin,
    /// Inclusive range `A:B`; spiral indices for the spiral builtin.
    #[arg(long, allow_hyphen_values = true)]
    cells: String,
    /// Expansion cap for `cones`.
    #[arg(long, default_value_t = DEFAULT_CONE_CAP)]
    cap: usize,
    /// Shift search radius for `recurrence`.
    #[arg(long, default_value_t = DEFAULT_RECURRENCE_RADIUS)]
    radius: i64,
    /// Steps observed by `periods`.
    #[arg(long, default_value_t = DEFAULT_TRACE_BUDGET)]
    budget: usize,
    /// Random initial configurations for `periods`, besides all-0.
    #[arg(long, default_value_t = 4)]
    seeds: u64,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::ConeEscape { .. } => EXIT_CONE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

macro_rules! impl_input_failure {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::input(e.to_string())
            }
        }
    )*};
}

impl_input_failure!(
    crate::rules::RuleError,
    crate::lattice::LatticeError,
    serde_json::Error
);

/// Parse `args` (program name first), run, and write to stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return EXIT_INPUT;
    }
    match execute(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("NUCA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NUCA_THREADS must be a positive integer, got `{raw}`"))?;
    // a pool may already exist when run more than once in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(command: Command) -> Result<(String, i32), Failure> {
    match command {
        Command::Simulate(a) => simulate(a).map(|s| (s, EXIT_OK)),
        Command::Render(a) => render(a).map(|s| (s, EXIT_OK)),
        Command::Verify(a) => verify(a),
        Command::Probe(a) => probe(a).map(|s| (s, EXIT_OK)),
        Command::Spiral {
            command: SpiralCommand::Export { n },
        } => Ok((spiral_csv(n), EXIT_OK)),
    }
}

fn builtin(b: Builtin) -> RuleDistribution {
    match b {
        Builtin::Odometer => build_three_state_odometer(),
        Builtin::OdometerZ => extend_to_z(),
        Builtin::Candidate => build_candidate_odometer().origin_g,
        Builtin::CandidateBoundary => build_candidate_odometer().fixed_boundary,
        Builtin::Example1 => build_example1(),
        Builtin::Spiral => build_spiral_odometer(),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn distribution(source: &Source) -> Result<RuleDistribution, Failure> {
    match (&source.builtin, &source.rules, &source.distribution) {
        (Some(b), _, _) => Ok(builtin(*b)),
        (None, Some(rules), Some(dist)) => {
            let rules = load_rules(&read(rules)?)
                .map_err(|e| Failure::input(format!("{}: {e}", rules.display())))?;
            load_distribution(&read(dist)?, &rules)
                .map_err(|e| Failure::input(format!("{}: {e}", dist.display())))
        }
        _ => Err(Failure::input(
            "give --builtin or both --rules and --distribution",
        )),
    }
}

/// On-disk initial pattern: listed cells with their states, plus a fill for
/// everything else (`"undefined"` unless given).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    cells: Vec<Cell>,
    states: Vec<State>,
    #[serde(default = "undefined")]
    fill: FillPolicy,
}

fn undefined() -> FillPolicy {
    FillPolicy::Undefined
}

fn initial(spec: &str, theta: &RuleDistribution) -> Result<WindowConfiguration, Failure> {
    let (kind, value) = spec.split_once(':').ok_or_else(|| {
        Failure::input(format!(
            "bad --init `{spec}`: expected uniform:S, seed:N or pattern:FILE"
        ))
    })?;
    let number = || {
        value
            .parse::<u64>()
            .map_err(|_| Failure::input(format!("bad --init `{spec}`: `{value}` is not a number")))
    };
    let (dim, q) = (theta.dim(), theta.q());
    Ok(match kind {
        "uniform" => {
            let s = State::try_from(number()?)
                .map_err(|_| Failure::input(format!("state {value} out of range")))?;
            WindowConfiguration::uniform(dim, s, q)?
        }
        "seed" => WindowConfiguration::seeded(dim, number()?, q)?,
        "pattern" => {
            let path = Path::new(value);
            let file: PatternFile = serde_json::from_slice(&read(path)?)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            if file.cells.len() != file.states.len() {
                return Err(Failure::input(format!(
                    "{}: {} cells but {} states",
                    path.display(),
                    file.cells.len(),
                    file.states.len()
                )));
            }
            let domain = Window::from_cells(file.cells.iter().cloned())?;
            let known = Pattern::from_fn(domain, |c| {
                file.states[file.cells.iter().position(|d| d == c).expect("listed cell")]
            });
            WindowConfiguration::new(known, file.fill, q)?
        }
        _ => {
            return Err(Failure::input(format!(
                "bad --init `{spec}`: unknown kind `{kind}`"
            )))
        }
    })
}

fn parse_cell(s: &str) -> Result<Cell, Failure> {
    let coords = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::input(format!("bad cell `{s}`")))?;
    Ok(Cell::new(&coords)?)
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let bad = || Failure::input(format!("bad range `{s}`: expected A:B with A ≤ B"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (
        a.trim().parse::<i64>().map_err(|_| bad())?,
        b.trim().parse::<i64>().map_err(|_| bad())?,
    );
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Cells of a range in display order: spiral indices in the plane, plain
/// coordinates on the line.
fn range_cells(theta: &RuleDistribution, s: &str) -> Result<Vec<Cell>, Failure> {
    let (a, b) = parse_range(s)?;
    match theta.dim() {
        1 => Ok((a..=b).map(Cell::line).collect()),
        2 if a >= 0 && theta.spec().kind.is_spiral() => {
            Ok((a as u64..=b as u64).map(spiral).collect())
        }
        _ => Err(Failure::input(
            "ranges need a 1D distribution or a nonnegative spiral index range",
        )),
    }
}

fn simulate(a: SimulateArgs) -> Result<String, Failure> {
    let theta = distribution(&a.source)?;
    let init = initial(&a.source.init, &theta)?;
    let cell = parse_cell(&a.cell)?;
    let tr = trace(&theta, &init, &cell, a.steps)?;
    Ok(match a.format {
        Format::Csv => trace_csv(&tr),
        Format::Json => serde_json::to_string(&tr)? + "\n",
        Format::Pgm => pgm(&tr.values, 1, theta.q()),
    })
}

fn render(a: RenderArgs) -> Result<String, Failure> {
    if a.format != Format::Pgm {
        return Err(Failure::input("render only writes pgm"));
    }
    let theta = distribution(&a.source)?;
    let init = initial(&a.source.init, &theta)?;
    let cells = range_cells(&theta, &a.cells)?;
    let targets = Window::from_cells(cells.iter().cloned())?;
    let ev = evolve_exact(&theta, &init, &targets, a.steps)?;
    // columns follow the requested order, not the window's sorted order
    let columns: Vec<usize> = cells
        .iter()
        .map(|c| targets.index_of(c).expect("target"))
        .collect();
    let frames: Vec<State> = (0..=a.steps)
        .flat_map(|t| {
            let row = ev.frame(t);
            columns.iter().map(move |&i| row[i])
        })
        .collect();
    Ok(pgm(&frames, cells.len(), theta.q()))
}

fn probe(a: ProbeArgs) -> Result<String, Failure> {
    let theta = builtin(a.builtin);
    let cells = range_cells(&theta, &a.cells)?;
    let mut out = String::new();
    match a.kind {
        ProbeKind::Cones => {
            out.push_str("cell,verdict,size\n");
            for c in cone_boundedness_probe(&theta, &cells, a.cap)? {
                let size = match &c.influence {
                    crate::engine::Influence::Finite(w) => w.len(),
                    crate::engine::Influence::CapReached { growth } => {
                        growth.last().copied().unwrap_or(1)
                    }
                };
                writeln!(out, "\"{}\",{},{size}", c.cell, c.verdict()).unwrap();
            }
        }
        ProbeKind::Recurrence => {
            let r = recurrence_offsets(&theta, &Window::from_cells(cells)?, a.radius)?;
            let offsets: Vec<&Cell> = r.offsets.iter().collect();
            out = serde_json::to_string_pretty(&json!({
                "count": offsets.len(),
                "offsets": offsets,
                "search_radius": r.search_radius,
            }))? + "\n";
        }
        ProbeKind::Periods => {
            let mut inits = vec![WindowConfiguration::uniform(theta.dim(), 0, theta.q())?];
            for s in 0..a.seeds {
                inits.push(WindowConfiguration::seeded(theta.dim(), s, theta.q())?);
            }
            let p = trace_period_probe(&theta, &cells, &inits, a.budget)?;
            out = serde_json::to_string_pretty(&serde_json::to_value(&p)?)? + "\n";
        }
    }
    Ok(out)
}

/// Rejects flags the check does not read.
fn only(a: &VerifyArgs, allowed: &[&str]) -> Result<(), Failure> {
    let given = [
        ("xmax", a.xmax.is_some()),
        ("periods", a.periods.is_some()),
        ("nmax", a.nmax.is_some()),
        ("lmax", a.lmax.is_some()),
        ("n", a.n.is_some()),
        ("cells", a.cells.is_some()),
        ("steps", a.steps.is_some()),
        ("seeds", a.seeds.is_some()),
        ("samples", a.samples.is_some()),
        ("seed", a.seed.is_some()),
        ("budget", a.budget.is_some()),
    ];
    match given
        .iter()
        .find(|(name, set)| *set && !allowed.contains(name))
    {
        Some((name, _)) => Err(Failure::input(format!(
            "--{name} does not apply to this check"
        ))),
        None => Ok(()),
    }
}

fn random_inits(
    dim: usize,
    q: State,
    count: u64,
) -> Result<Vec<(String, WindowConfiguration)>, Failure> {
    let mut inits = vec![(
        "uniform:0".to_string(),
        WindowConfiguration::uniform(dim, 0, q)?,
    )];
    for s in 0..count {
        inits.push((format!("seed:{s}"), WindowConfiguration::seeded(dim, s, q)?));
    }
    Ok(inits)
}

fn verify(a: VerifyArgs) -> Result<(String, i32), Failure> {
    let check = a
        .check
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let (params, pass, details): (Value, Option<bool>, Value) = match a.check {
        Check::OdometerPeriod => {
            only(&a, &["xmax"])?;
            let xmax = a.xmax.unwrap_or(8);
            let r = verify_trace_period(xmax)?;
            (
                json!({ "xmax": xmax }),
                Some(r.iter().all(|c| c.pass)),
                serde_json::to_value(r)?,
            )
        }
        Check::OdometerBlocks => {
            only(&a, &["xmax", "periods"])?;
            let (xmax, periods) = (a.xmax.unwrap_or(8), a.periods.unwrap_or(3));
            let reports = (0..=xmax)
                .map(|x| verify_block_structure(x, periods))
                .collect::<Result<Vec<_>, _>>()?;
            let pass = reports.iter().all(|r| r.pass());
            let summary: Vec<Value> = reports
                .iter()
                .map(|r| {
                    let b = &r.blocks[0];
                    json!({
                        "x": r.x,
                        "p": b.p,
                        "n": b.n,
                        "ones_in_a": b.ones_in_a,
                        "twos_in_b": b.twos_in_b,
                        "violations": r.violations,
                    })
                })
                .collect();
            (
                json!({ "xmax": xmax, "periods": periods }),
                Some(pass),
                Value::Array(summary),
            )
        }
        Check::OdometerSurjectivity => {
            only(&a, &["nmax", "seeds"])?;
            let (nmax, seeds) = (a.nmax.unwrap_or(8), a.seeds.unwrap_or(20));
            if !(1..=12).contains(&nmax) {
                return Err(Failure::input("--nmax must lie in 1..=12"));
            }
            let mut rows = Vec::new();
            let mut pass = true;
            for (name, init) in random_inits(1, 3, seeds)? {
                for n in 1..=nmax {
                    let r = verify_window_surjectivity(n, &init)?;
                    pass &= r.pass;
                    rows.push(json!({ "init": name, "n": n, "distinct_words": r.distinct_words, "pass": r.pass, "missing": r.missing }));
                }
            }
            (
                json!({ "nmax": nmax, "seeds": seeds }),
                Some(pass),
                Value::Array(rows),
            )
        }
        Check::Lemma1 | Check::Lemma2 => {
            only(&a, &["lmax"])?;
            let lmax = a
                .lmax
                .unwrap_or(if a.check == Check::Lemma1 { 14 } else { 16 });
            if !(1..=24).contains(&lmax) {
                return Err(Failure::input("--lmax must lie in 1..=24"));
            }
            let r = if a.check == Check::Lemma1 {
                lemma1_oracle(lmax)
            } else {
                lemma2_oracle(lmax)
            };
            (
                json!({ "lmax": lmax }),
                Some(r.pass),
                serde_json::to_value(r)?,
            )
        }
        Check::SpiralEquivalence => {
            only(&a, &["n", "steps", "seeds"])?;
            let (n, steps, seeds) = (
                a.n.unwrap_or(25),
                a.steps.unwrap_or(pow3(6)),
                a.seeds.unwrap_or(5),
            );
            if n == 0 {
                return Err(Failure::input("--n must be positive"));
            }
            let mut rows = Vec::new();
            let mut pass = true;
            for (name, init) in random_inits(1, 3, seeds)? {
                let r = verify_embedding_equivalence(n, steps, &init)?;
                pass &= r.pass;
                rows.push(
                    json!({ "init": name, "pass": r.pass, "first_divergence": r.first_divergence }),
                );
            }
            (
                json!({ "n": n, "steps": steps, "seeds": seeds }),
                Some(pass),
                Value::Array(rows),
            )
        }
        Check::Example1Witness => {
            only(&a, &["samples", "seed"])?;
            let (samples, seed) = (a.samples.unwrap_or(100), a.seed.unwrap_or(0));
            let theta = build_example1();
            let mut failed = Vec::new();
            let mut rs = Vec::new();
            for i in 0..samples as u64 {
                let w = random_witness(seed.wrapping_add(i), 4, 2)?;
                rs.push(w.r);
                if !w.verify(&theta)? {
                    failed.push(seed.wrapping_add(i));
                }
            }
            let odd = rs.iter().filter(|&&r| r % 2 == 1).count();
            (
                json!({ "samples": samples, "seed": seed, "window": [-4, 4], "domain": [-2, 2] }),
                Some(failed.is_empty()),
                json!({ "failed_seeds": failed, "odd_r": odd, "even_r": rs.len() - odd }),
            )
        }
        Check::Example1H2 => {
            only(&a, &["samples", "seed", "budget"])?;
            let (samples, seed, budget) = (
                a.samples.unwrap_or(1000),
                a.seed.unwrap_or(0),
                a.budget.unwrap_or(10_000),
            );
            let h2 = check_origin_invariant_h2(samples, seed)?;
            let pairs = (samples / 10).max(1);
            let obstruction = check_weak_mixing_obstruction(pairs, budget, seed)?;
            (
                json!({ "samples": samples, "seed": seed, "budget": budget }),
                Some(h2.pass && obstruction.pass),
                json!({ "origin_invariant": h2, "origin_trace_pairs": obstruction }),
            )
        }
        Check::CandidateEquivalence => {
            only(&a, &["cells", "steps", "seeds"])?;
            let (cells, steps, seeds) = (
                a.cells.unwrap_or(11),
                a.steps.unwrap_or(pow3(8)),
                a.seeds.unwrap_or(10),
            );
            if cells == 0 {
                return Err(Failure::input("--cells must be positive"));
            }
            let mut rows = Vec::new();
            let mut pass = true;
            for (name, init) in random_inits(1, 3, seeds)? {
                let r = verify_candidate_equivalence(cells, steps, &init)?;
                pass &= r.pass;
                rows.push(
                    json!({ "init": name, "pass": r.pass, "first_divergence": r.first_divergence }),
                );
            }
            (
                json!({ "cells": cells, "steps": steps, "seeds": seeds }),
                Some(pass),
                Value::Array(rows),
            )
        }
        Check::CandidatePeriod => {
            only(&a, &["xmax", "steps"])?;
            let xmax = a.xmax.unwrap_or(5);
            if xmax > 12 {
                return Err(Failure::input("--xmax must be at most 12"));
            }
            let steps = a.steps.unwrap_or(3 * pow3(xmax as u32 + 1));
            let r = candidate_period_report(xmax, steps)?;
            (
                json!({ "xmax": xmax, "steps": steps }),
                None,
                json!({ "report_only": true, "cells": r }),
            )
        }
    };
    let report = json!({ "check": check, "params": params, "pass": pass, "details": details });
    match pass {
        Some(true) => eprintln!("{check}: PASS"),
        Some(false) => eprintln!("{check}: FAIL"),
        None => eprintln!("{check}: CONJECTURE (measured values only, nothing asserted)"),
    }
    let code = if pass == Some(false) {
        EXIT_VERIFY
    } else {
        EXIT_OK
    };
    Ok((serde_json::to_string_pretty(&report)? + "\n", code))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("nuca").chain(args.iter().copied())).unwrap()
    }

    fn exec(args: &[&str]) -> Result<(String, i32), Failure> {
        execute(parse(args).command)
    }

    #[test]
    fn odometer_trace_of_cell_one() {
        let (out, code) = exec(&[
            "simulate",
            "--builtin",
            "odometer",
            "--cell",
            "1",
            "--steps",
            "18",
        ])
        .unwrap();
        assert_eq!(code, 0);
        let values: Vec<&str> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(values.concat(), "0011102220011102220");
    }

    #[test]
    fn toggle_trace() {
        let (out, _) = exec(&[
            "simulate",
            "--builtin",
            "example1",
            "--cell",
            "0",
            "--steps",
            "4",
        ])
        .unwrap();
        assert_eq!(out, "t,state\n0,0\n1,1\n2,0\n3,1\n4,0\n");
    }

    #[test]
    fn negative_cells_and_json() {
        let (out, _) = exec(&[
            "simulate",
            "--builtin",
            "odometer-z",
            "--cell",
            "-3",
            "--steps",
            "2",
            "--format",
            "json",
        ])
        .unwrap();
        assert!(
            out.starts_with("{\"cell\":[-3],\"values\":[0,0,0]"),
            "{out}"
        );
    }

    #[test]
    fn input_errors() {
        let f = exec(&[
            "simulate",
            "--rules",
            "/nonexistent/r.json",
            "--distribution",
            "/nonexistent/d.json",
            "--cell",
            "0",
            "--steps",
            "1",
        ])
        .unwrap_err();
        assert_eq!(f.code, EXIT_INPUT);
        let f = exec(&[
            "simulate",
            "--builtin",
            "odometer",
            "--cell",
            "-1",
            "--steps",
            "1",
        ])
        .unwrap_err();
        assert_eq!(f.code, EXIT_INPUT);
        let f = exec(&[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            "banana",
            "--cell",
            "0",
            "--steps",
            "1",
        ])
        .unwrap_err();
        assert_eq!(f.code, EXIT_INPUT);
        let f = exec(&[
            "simulate",
            "--builtin",
            "odometer",
            "--init",
            "uniform:3",
            "--cell",
            "0",
            "--steps",
            "1",
        ])
        .unwrap_err();
        assert_eq!(f.code, EXIT_INPUT);
        let f = exec(&["verify", "lemma1", "--xmax", "3"]).unwrap_err();
        assert_eq!(f.code, EXIT_INPUT);
        assert!(Cli::try_parse_from(["nuca", "verify", "no-such-check"]).is_err());
    }

    #[test]
    fn render_shape() {
        let (out, _) = exec(&[
            "render",
            "--builtin",
            "odometer",
            "--cells",
            "0:9",
            "--steps",
            "0",
        ])
        .unwrap();
        assert_eq!(out, "P2\n10 1\n255\n0 0 0 0 0 0 0 0 0 0\n");
        let (line, _) = exec(&[
            "render",
            "--builtin",
            "odometer",
            "--cells",
            "0:24",
            "--steps",
            "27",
        ])
        .unwrap();
        let (plane, _) = exec(&[
            "render",
            "--builtin",
            "spiral",
            "--cells",
            "0:24",
            "--steps",
            "27",
        ])
        .unwrap();
        assert!(line.starts_with("P2\n25 28\n"));
        assert_eq!(line, plane);
    }

    #[test]
    fn verify_reports() {
        let (out, code) = exec(&["verify", "odometer-period", "--xmax", "3"]).unwrap();
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], json!(true));
        assert_eq!(v["check"], json!("odometer-period"));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["check", "details", "params", "pass"]);

        let (out, code) = exec(&["verify", "candidate-period", "--xmax", "2"]).unwrap();
        assert_eq!(code, 0);
        assert!(out.contains("\"report_only\": true"));
    }

    #[test]
    fn probes() {
        let (out, _) = exec(&[
            "probe",
            "cones",
            "--builtin",
            "example1",
            "--cells",
            "-1:1",
            "--cap",
            "20",
        ])
        .unwrap();
        assert_eq!(
            out,
            "cell,verdict,size\n\"-1\",inconclusive,21\n\"0\",finite,1\n\"1\",inconclusive,21\n"
        );
        let (out, _) = exec(&[
            "probe",
            "recurrence",
            "--builtin",
            "odometer-z",
            "--cells",
            "-1:1",
            "--radius",
            "500",
        ])
        .unwrap();
        assert!(out.contains("\"count\": 0"));
    }
}
