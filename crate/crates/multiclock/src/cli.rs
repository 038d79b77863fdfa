//! The `mclk` command-line front end.
//!
//! Exit codes: 0 on success and all-True verdicts, 1 on False or
//! inconclusive verdicts, infeasible parameters or a failed run, 2 on usage
//! and I/O errors. Every report printed is also written under `--out`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analysis::{check_constraints, system_contract_summary, AnalysisError, ParameterSet};
use crate::behaviors::codec::{decode, encode, DecodeError};
use crate::behaviors::SystemBehavior;
use crate::contracts::{compose, refines_on, satisfies, Contract, ContractError, Refinement, SatisfactionReport};
use crate::executive::{max_abs_theta, run, to_csv, ExecError, Scenario};
use crate::mcl::{eventually_always_witness, parse, Env, EvalError, Truth};
use crate::predicates::Registry;

pub const NOMINAL_SCENARIO: &str = include_str!("../data/nominal.toml");
pub const DELAYED_SCENARIO: &str = include_str!("../data/delayed.toml");
pub const NOMINAL_PARAMS: &str = include_str!("../data/nominal.params");
pub const DELAYED_PARAMS: &str = include_str!("../data/delayed.params");

/// The shipped contracts, by file stem.
pub const CONTRACTS: [(&str, &str); 5] = [
    ("mpc", include_str!("../data/contracts/mpc.contract")),
    ("fl", include_str!("../data/contracts/fl.contract")),
    ("est", include_str!("../data/contracts/est.contract")),
    ("tmg", include_str!("../data/contracts/tmg.contract")),
    ("system", include_str!("../data/contracts/system.contract")),
];

/// The four component contracts monitored by `demo`.
pub const COMPONENTS: [&str; 4] = ["mpc", "fl", "est", "tmg"];

/// Message freshness on each controller clock, read off the timing formulas.
pub const FRESHNESS: [&str; 2] = ["@m. G (r - l^r(0) < T_fresh_m)", "@l. G (r - m^r(0) < T_fresh_l)"];

pub fn shipped_contract(stem: &str) -> Option<Contract> {
    CONTRACTS
        .iter()
        .find(|(s, _)| *s == stem)
        .map(|(_, text)| Contract::parse_file(text).expect("shipped contracts parse"))
}

#[derive(Debug, Parser)]
#[command(name = "mclk", version, about = "Multiclock logic monitoring and contract analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Trace file; repeat to form a corpus.
    #[arg(long, global = true)]
    pub trace: Vec<PathBuf>,
    /// Contract file; repeatable.
    #[arg(long, global = true)]
    pub contract: Vec<PathBuf>,
    /// Parameter set file (TOML).
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Directory receiving the written reports.
    #[arg(long, global = true, default_value = "mclk-out")]
    pub out: PathBuf,
    /// Reseeds every random stream of the scenario.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs a scenario and writes its trace.
    Simulate,
    /// Checks traces against contracts.
    Monitor,
    /// Composes two or more contracts.
    Compose,
    /// Checks that the first contract refines the second on a trace corpus.
    Refine,
    /// Evaluates the parameter constraints.
    CheckParams,
    /// Runs a shipped case study end to end.
    Demo {
        #[arg(value_enum)]
        variant: Variant,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Nominal,
    Delayed,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: DecodeError },
    #[error("{path}: {source}")]
    Contract { path: PathBuf, source: ContractError },
    #[error(transparent)]
    Compose(ContractError),
    #[error(transparent)]
    Params(#[from] AnalysisError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Exec(ExecError::SolverFailure { .. } | ExecError::Plant { .. }) => 1,
            CliError::Params(AnalysisError::InfeasibleParameters(_)) => 1,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_report(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

fn load_scenario(cli: &Cli, fallback: Option<&str>) -> Result<Scenario, CliError> {
    let text = match (&cli.scenario, fallback) {
        (Some(p), _) => read(p)?,
        (None, Some(t)) => t.to_string(),
        (None, None) => return Err(CliError::Usage("--scenario is required".into())),
    };
    let sc = Scenario::from_toml(&text)?;
    Ok(match cli.seed {
        Some(s) => sc.with_seed(s),
        None => sc,
    })
}

fn load_contracts(cli: &Cli) -> Result<Vec<Contract>, CliError> {
    cli.contract
        .iter()
        .map(|p| Contract::parse_file(&read(p)?).map_err(|source| CliError::Contract { path: p.clone(), source }))
        .collect()
}

fn load_traces(cli: &Cli) -> Result<Vec<SystemBehavior>, CliError> {
    cli.trace.iter().map(|p| decode(&read(p)?).map_err(|source| CliError::Trace { path: p.clone(), source })).collect()
}

/// Predicates for monitoring; the nominal scenario supplies the plant and
/// cost function when no scenario is given.
fn registry(cli: &Cli) -> Result<Registry, CliError> {
    Ok(load_scenario(cli, Some(NOMINAL_SCENARIO))?.registry()?)
}

fn render_reports(reports: &[SatisfactionReport], format: Format) -> String {
    match format {
        Format::Text => reports.iter().map(SatisfactionReport::render).collect(),
        Format::Csv => {
            let mut s = String::from("contract,behavior,side,verdict,witness,formula\n");
            for r in reports {
                for (i, b) in r.behaviors.iter().enumerate() {
                    let _ = writeln!(s, "{},{i},implication,{},,", r.contract, b.implication.truth);
                    for c in &b.conjuncts {
                        let w = c.verdict.witness.map(|w| w.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{},{i},{},{},{w},\"{}\"", r.contract, c.side, c.verdict.truth, c.formula);
                    }
                }
            }
            s
        }
    }
}

/// Parses `args` and runs the command, printing to `out`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mclk: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let (text, code) = match &cli.command {
        Command::Simulate => simulate(cli)?,
        Command::Monitor => monitor(cli)?,
        Command::Compose => compose_cmd(cli)?,
        Command::Refine => refine(cli)?,
        Command::CheckParams => check_params(cli)?,
        Command::Demo { variant } => demo(cli, *variant)?,
    };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
    Ok(code)
}

fn simulate(cli: &Cli) -> Result<(String, i32), CliError> {
    let sc = load_scenario(cli, None)?;
    let beh = run(&sc)?;
    let csv = to_csv(&beh);
    write_report(&cli.out, "trace.mclt", &encode(&beh))?;
    write_report(&cli.out, "run.csv", &csv)?;
    let text = match cli.format {
        Format::Csv => csv,
        Format::Text => format!(
            "simulated {} s: {} r ticks, {} l ticks, {} m ticks, max |theta| {:.6}\n",
            sc.run.duration,
            beh.len(crate::executive::R),
            beh.len(crate::executive::L),
            beh.len(crate::executive::M),
            max_abs_theta(&beh)
        ),
    };
    Ok((text, 0))
}

fn monitor(cli: &Cli) -> Result<(String, i32), CliError> {
    if cli.trace.is_empty() || cli.contract.is_empty() {
        return Err(CliError::Usage("monitor needs --trace and at least one --contract".into()));
    }
    let corpus = load_traces(cli)?;
    let contracts = load_contracts(cli)?;
    let reg = registry(cli)?;
    let reports = contracts.iter().map(|c| satisfies(&corpus, c, &reg)).collect::<Result<Vec<_>, _>>()?;
    let all = reports.iter().fold(Truth::True, |acc, r| acc.and(r.aggregate));
    let text = render_reports(&reports, cli.format);
    let name = if cli.format == Format::Csv { "monitor.csv" } else { "monitor.txt" };
    write_report(&cli.out, name, &text)?;
    Ok((text, if all == Truth::True { 0 } else { 1 }))
}

fn compose_cmd(cli: &Cli) -> Result<(String, i32), CliError> {
    let contracts = load_contracts(cli)?;
    let Some((first, rest)) = contracts.split_first() else {
        return Err(CliError::Usage("compose needs at least two --contract files".into()));
    };
    if rest.is_empty() {
        return Err(CliError::Usage("compose needs at least two --contract files".into()));
    }
    let mut acc = first.clone();
    for c in rest {
        acc = compose(&acc, c).map_err(CliError::Compose)?;
    }
    let text = acc.to_file_string();
    write_report(&cli.out, "composed.contract", &text)?;
    Ok((text, 0))
}

fn refine(cli: &Cli) -> Result<(String, i32), CliError> {
    let contracts = load_contracts(cli)?;
    let [c, c2] = contracts.as_slice() else {
        return Err(CliError::Usage("refine needs exactly two --contract files".into()));
    };
    let corpus = load_traces(cli)?;
    let reg = registry(cli)?;
    let (text, code) = match refines_on(c, c2, &corpus, &reg)? {
        Refinement::Holds => (format!("{} refines {} on {} behaviors\n", c.name, c2.name, corpus.len()), 0),
        Refinement::Counterexample { behavior, reason } => {
            (format!("{} does not refine {}: behavior {behavior}: {reason}\n", c.name, c2.name), 1)
        }
    };
    write_report(&cli.out, "refine.txt", &text)?;
    Ok((text, code))
}

fn params_text(cli: &Cli, fallback: Option<&str>) -> Result<String, CliError> {
    match (&cli.params, fallback) {
        (Some(p), _) => read(p),
        (None, Some(t)) => Ok(t.to_string()),
        (None, None) => Err(CliError::Usage("--params is required".into())),
    }
}

fn constraint_text(p: &ParameterSet, format: Format) -> Result<(String, bool), CliError> {
    let report = check_constraints(p)?;
    let text = match format {
        Format::Text => report.render_text(),
        Format::Csv => report.render_csv(),
    };
    Ok((text, report.feasible()))
}

fn check_params(cli: &Cli) -> Result<(String, i32), CliError> {
    let p = ParameterSet::from_toml(&params_text(cli, None)?)?;
    let (mut text, feasible) = constraint_text(&p, cli.format)?;
    let name = if cli.format == Format::Csv { "constraints.csv" } else { "constraints.txt" };
    write_report(&cli.out, name, &text)?;
    if feasible {
        if let Ok(sc) = load_scenario(cli, None) {
            let summary = system_contract_summary(&p, sc.run.x_i)?;
            write_report(&cli.out, "system.contract", &summary)?;
            text.push_str(&summary);
        }
    }
    Ok((text, if feasible { 0 } else { 1 }))
}

fn demo(cli: &Cli, variant: Variant) -> Result<(String, i32), CliError> {
    let (scenario, params) = match variant {
        Variant::Nominal => (NOMINAL_SCENARIO, NOMINAL_PARAMS),
        Variant::Delayed => (DELAYED_SCENARIO, DELAYED_PARAMS),
    };
    let sc = load_scenario(cli, Some(scenario))?;
    let p = ParameterSet::from_toml(&params_text(cli, Some(params))?)?;
    let dir = &cli.out;

    let beh = run(&sc)?;
    write_report(dir, "trace.mclt", &encode(&beh))?;
    write_report(dir, "run.csv", &to_csv(&beh))?;

    let (constraints, feasible) = constraint_text(&p, Format::Text)?;
    write_report(dir, "constraints.txt", &constraints)?;

    let reg = sc.registry()?;
    let corpus = [beh];
    let mut reports = Vec::new();
    for stem in COMPONENTS {
        let c = shipped_contract(stem).expect("component contract is shipped");
        reports.push(satisfies(&corpus, &c, &reg)?);
    }
    let monitor = render_reports(&reports, Format::Text);
    write_report(dir, "monitor.txt", &monitor)?;
    let no_false = reports.iter().all(|r| r.aggregate != Truth::False);

    let system = shipped_contract("system").expect("system contract is shipped");
    let env = Env::new(&reg, &system.params);
    let fg = crate::mcl::eval_global(&system.guarantees, &corpus[0], &env)?;
    let witness = eventually_always_witness(&system.guarantees, &corpus[0], &env)?;

    let timing = shipped_contract("tmg").expect("timing contract is shipped");
    let tenv = Env::new(&reg, &timing.params);
    let mut fresh = Vec::new();
    for f in FRESHNESS {
        fresh.push((f, crate::mcl::eval_global(&parse(f).expect("fixed formula"), &corpus[0], &tenv)?));
    }

    let theta = max_abs_theta(&corpus[0]);
    let in_box = theta <= sc.plant.theta_max;
    let mut s = String::new();
    let _ = writeln!(s, "demo {}", if variant == Variant::Nominal { "nominal" } else { "delayed" });
    let _ = writeln!(s, "max |theta| {theta:.6} (theta_max {:.6}): {}", sc.plant.theta_max, if in_box { "ok" } else { "VIOLATED" });
    let _ = writeln!(s, "constraints: {}", if feasible { "feasible" } else { "infeasible" });
    for r in &reports {
        let _ = writeln!(s, "contract {}: {}", r.contract, r.aggregate);
    }
    for (f, v) in &fresh {
        let w = v.witness.map(|w| format!(" @{w}")).unwrap_or_default();
        let _ = writeln!(s, "freshness {}{w}: {f}", v.truth);
    }
    let w = witness.map(|w| format!("l tick {w}")).unwrap_or_else(|| "none".into());
    let _ = writeln!(s, "{}: {} (suffix witness: {w})", system.guarantees, fg.truth);
    write_report(dir, "summary.txt", &s)?;
    let _ = write!(s, "\n{constraints}\n{monitor}");

    let ok = feasible && no_false && in_box;
    Ok((s, if ok { 0 } else { 1 }))
}
