//! `realloc`: solve, trace and audit reallocation rules from the command line.
//!
//! Exit codes: 0 when everything passes, 1 when a violation or mismatch is
//! found, 2 for usage and parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use realloc_core::audit::{self, AuditConfig, Tally, AXIOMS};
use realloc_core::econgen::GenConfig;
use realloc_core::format::{parse_economy, parse_witnesses, serialize_witness};
use realloc_core::iterative::{check_step_conditions, derive_trace, uniform_lambda_trace, Trace};
use realloc_core::manipulation::{self, Mode, Template};
use realloc_core::reference_cases::{run_example, Example};
use realloc_core::shrink::shrink_witness;
use realloc_core::{Economy, Error, Rational, RuleId, Witness, WitnessKind};

#[derive(Parser)]
#[command(
    name = "realloc",
    version,
    about = "Exact reallocation rules for single-peaked economies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a rule to an economy file.
    Solve {
        #[arg(long)]
        rule: RuleId,
        file: PathBuf,
    },
    /// Print the step-by-step net-trade trace of a rule.
    Trace {
        #[arg(long, default_value = "uniform")]
        rule: RuleId,
        /// Use the explicit water-level recursion of the uniform rule.
        #[arg(long)]
        lambda: bool,
        file: PathBuf,
    },
    /// Audit axioms over a seeded battery of random economies.
    Audit {
        #[arg(long)]
        rule: RuleId,
        /// Axiom tag, or `all`.
        #[arg(long, default_value = "all")]
        axiom: String,
        #[command(flatten)]
        battery: Battery,
        /// Shrink the reported witness before printing it.
        #[arg(long)]
        shrink: bool,
    },
    /// Search for a variable-population manipulation.
    Manipulate {
        #[arg(long)]
        check: Check,
        #[arg(long)]
        rule: RuleId,
        #[arg(long, value_enum, default_value = "strict")]
        mode: ModeArg,
        #[arg(long)]
        shrink: bool,
        #[command(flatten)]
        battery: Battery,
        /// Search this economy instead of a random battery.
        file: Option<PathBuf>,
    },
    /// Construct a witness from its closed-form template.
    Witness {
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        rule: RuleId,
        /// Template values `low,high,mid`.
        #[arg(long, default_value = "1,5,3")]
        template: String,
    },
    /// Re-run built-in examples or stored witnesses.
    Replay {
        /// 1, 2, 3, 4, B1 or all.
        #[arg(long, conflicts_with = "witness")]
        example: Option<String>,
        /// A file of witness blocks.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Battery {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    agents_max: usize,
    #[arg(long, default_value_t = 4)]
    grid_denominator: u32,
    /// Draw only positive endowments (always on for proportional).
    #[arg(long)]
    positive_endowments: bool,
}

impl Battery {
    fn config(&self, rule: &RuleId) -> AuditConfig {
        let base = GenConfig {
            max_agents: self.agents_max,
            denominator_bound: self.grid_denominator,
            positive_endowments: self.positive_endowments,
            seed: self.seed,
            ..GenConfig::default()
        };
        AuditConfig {
            generator: audit::generator_for(rule, &base),
            trials: self.trials,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Withdrawal,
    Merging,
    Splitting,
    Predelivery,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Predelivery,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Violation,
}

impl Status {
    fn from_clean(clean: bool) -> Self {
        if clean {
            Status::Pass
        } else {
            Status::Violation
        }
    }

    fn and(self, other: Status) -> Status {
        if self == Status::Pass {
            other
        } else {
            self
        }
    }
}

fn read_economy(path: &Path) -> Result<Economy, String> {
    let text = fs::read_to_string(path).map_err(|err| format!("{}: {err}", path.display()))?;
    parse_economy(&text).map_err(|err| format!("{}: {err}", path.display()))
}

fn ids(set: impl IntoIterator<Item = realloc_core::AgentId>) -> String {
    let parts: Vec<String> = set.into_iter().map(|id| id.to_string()).collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(",")
    }
}

fn solve(rule: &RuleId, file: &Path) -> Result<Status, String> {
    let e = read_economy(file)?;
    let x = rule.apply(&e).map_err(|err| err.to_string())?;
    let trades = x.net_trades(&e);
    for (id, v) in x.iter() {
        println!("alloc {id} {v} net {}", trades[&id]);
    }
    println!("z={}", e.excess());
    Ok(Status::Pass)
}

fn print_trace(trace: &Trace) -> Status {
    for step in &trace.steps {
        let q: Vec<String> = step.net_trades.iter().map(|(id, v)| format!("{id}:{v}")).collect();
        let mut line = format!(
            "step t={} q={} frozen={}",
            step.t,
            q.join(","),
            ids(step.frozen.iter().copied())
        );
        if let Some(lambda) = step.lambda {
            line.push_str(&format!(" lambda={lambda}"));
        }
        println!("{line}");
    }
    let report = check_step_conditions(trace);
    for v in &report.violations {
        println!("condition-failed {v}");
    }
    println!("stationarity-checked={}", report.stationarity_checked);
    Status::from_clean(report.passed())
}

fn trace(rule: &RuleId, lambda: bool, file: &Path) -> Result<Status, String> {
    let e = read_economy(file)?;
    let trace = if lambda {
        uniform_lambda_trace(&e)
    } else {
        derive_trace(rule, &e).map_err(|err| err.to_string())?
    };
    let status = print_trace(&trace);
    let x = if lambda {
        RuleId::UniformRealloc.apply(&e)
    } else {
        rule.apply(&e)
    }
    .map_err(|err| err.to_string())?;
    let matches = *trace.final_net_trades() == x.net_trades(&e);
    println!("final-matches-rule={matches}");
    Ok(status.and(Status::from_clean(matches)))
}

fn print_witness(w: &Witness, shrink: bool) -> Result<(), String> {
    let w = if shrink {
        shrink_witness(w).map_err(|err| err.to_string())?
    } else {
        w.clone()
    };
    print!("{}", serialize_witness(&w));
    Ok(())
}

fn print_tally(t: &Tally, shrink: bool) -> Result<Status, String> {
    println!(
        "property={} economies={} passed={} violations={} inapplicable={} outside-domain={} cases={}",
        t.kind, t.economies, t.passed, t.violations, t.inapplicable, t.outside_domain, t.cases
    );
    if let Some((trial, w)) = &t.first {
        println!("first-violation trial={trial}");
        print_witness(w, shrink)?;
    }
    Ok(Status::from_clean(t.is_clean()))
}

fn audit_cmd(rule: &RuleId, axiom: &str, battery: &Battery, shrink: bool) -> Result<Status, CliError> {
    let kinds: Vec<WitnessKind> = if axiom == "all" {
        AXIOMS.to_vec()
    } else {
        let kind: WitnessKind = axiom
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown axiom `{axiom}`")))?;
        if !AXIOMS.contains(&kind) {
            return Err(CliError::Usage(format!(
                "`{axiom}` is not an axiom; use the manipulate command"
            )));
        }
        vec![kind]
    };
    let config = battery.config(rule);
    let tallies = audit::audit_axioms(rule, &kinds, &config).map_err(CliError::from)?;
    let mut status = Status::Pass;
    for t in &tallies {
        status = status.and(print_tally(t, shrink)?);
    }
    Ok(status)
}

fn kind_of(check: Check, mode: Mode) -> WitnessKind {
    match (check, mode) {
        (Check::Withdrawal, Mode::Strict) => WitnessKind::Withdrawal,
        (Check::Withdrawal, Mode::Weak) => WitnessKind::WeakWithdrawal,
        (Check::Merging, _) => WitnessKind::Merging,
        (Check::Splitting, _) => WitnessKind::Splitting,
        (Check::Predelivery, _) => WitnessKind::Predelivery,
    }
}

fn manipulate(
    check: Check,
    rule: &RuleId,
    mode: Mode,
    shrink: bool,
    battery: &Battery,
    file: Option<&Path>,
) -> Result<Status, CliError> {
    let kind = kind_of(check, mode);
    let Some(file) = file else {
        let tally = audit::audit_manipulation(rule, kind, mode, &battery.config(rule))?;
        return Ok(print_tally(&tally, shrink)?);
    };
    let e = read_economy(file).map_err(CliError::Usage)?;
    let found = match check {
        Check::Withdrawal => manipulation::find_withdrawal(rule, &e, mode),
        Check::Merging => manipulation::find_merging(rule, &e),
        Check::Splitting => manipulation::find_splitting_default(rule, &e),
        Check::Predelivery => manipulation::find_predelivery(rule, &e),
    }?;
    println!("property={kind} found={}", found.is_some());
    if check == Check::Splitting && found.is_none() {
        println!("note=splitting search covers a finite guest and split battery only");
    }
    match found {
        Some(w) => {
            print_witness(&w, shrink)?;
            Ok(Status::Violation)
        }
        None => Ok(Status::Pass),
    }
}

fn parse_template(text: &str) -> Result<Template, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    let [low, high, mid] = parts.as_slice() else {
        return Err(CliError::Usage(format!("template `{text}` must be low,high,mid")));
    };
    let value = |s: &str| {
        s.parse::<Rational>()
            .map_err(|err| CliError::Usage(format!("template value `{s}`: {err}")))
    };
    Ok(Template {
        low: value(low)?,
        high: value(high)?,
        mid: value(mid)?,
    })
}

fn witness_cmd(rule: &RuleId, template: &str) -> Result<Status, CliError> {
    let template = parse_template(template)?;
    let w = manipulation::construct_predelivery_witness(rule, &template)?;
    print!("{}", serialize_witness(&w));
    Ok(Status::Violation)
}

fn replay(example: Option<&str>, witness: Option<&Path>) -> Result<Status, CliError> {
    if let Some(path) = witness {
        let text = fs::read_to_string(path).map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))?;
        let witnesses = parse_witnesses(&text).map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))?;
        if witnesses.is_empty() {
            return Err(CliError::Usage(format!("{}: no witness blocks", path.display())));
        }
        let mut status = Status::Pass;
        for (k, w) in witnesses.iter().enumerate() {
            match w.replay() {
                Ok(comparison) => {
                    println!("witness {} kind={} rule={} replay=ok", k + 1, w.kind, w.rule);
                    for line in comparison.lines() {
                        println!("  {line}");
                    }
                }
                Err(err) => {
                    println!("witness {} kind={} rule={} replay=stale {err}", k + 1, w.kind, w.rule);
                    status = Status::Violation;
                }
            }
        }
        return Ok(status);
    }
    let selected: Vec<Example> = match example {
        None | Some("all") => Example::ALL.to_vec(),
        Some(name) => vec![name.parse().map_err(|err: Error| CliError::Usage(err.to_string()))?],
    };
    let mut status = Status::Pass;
    for ex in selected {
        let report = run_example(ex)?;
        println!("example {ex}");
        for c in &report.checks {
            let verdict = if c.passed() { "ok" } else { "MISMATCH" };
            println!("  {}: {} expected={} {verdict}", c.label, c.actual, c.expected);
        }
        status = status.and(Status::from_clean(report.passed()));
    }
    Ok(status)
}

enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Core(err)
    }
}

impl From<String> for CliError {
    fn from(message: String) -> Self {
        CliError::Usage(message)
    }
}

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Solve { rule, file } => Ok(solve(&rule, &file)?),
        Command::Trace { rule, lambda, file } => Ok(trace(&rule, lambda, &file)?),
        Command::Audit {
            rule,
            axiom,
            battery,
            shrink,
        } => audit_cmd(&rule, &axiom, &battery, shrink),
        Command::Manipulate {
            check,
            rule,
            mode,
            shrink,
            battery,
            file,
        } => {
            let mode = match mode {
                ModeArg::Strict => Mode::Strict,
                ModeArg::Weak => Mode::Weak,
            };
            manipulate(check, &rule, mode, shrink, &battery, file.as_deref())
        }
        Command::Witness {
            property: Property::Predelivery,
            rule,
            template,
        } => witness_cmd(&rule, &template),
        Command::Replay { example, witness } => replay(example.as_deref(), witness.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => {
            println!("RESULT pass");
            ExitCode::SUCCESS
        }
        Ok(Status::Violation) => {
            println!("RESULT violation");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            println!("RESULT error");
            ExitCode::from(2)
        }
        Err(CliError::Core(err)) => {
            eprintln!("error: {err}");
            println!("RESULT error");
            ExitCode::from(2)
        }
    }
}
