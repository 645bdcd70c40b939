//! `circa`: entailment in minimal models, variables free for negation and
//! GCWA closure from the command line.
//!
//! Results follow the SAT competition line protocol: an `s` line with the
//! verdict, a `v` line with a witness and an `f` line with free variables.
//! Other lines start with `c`.

mod bench;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "circa", version, about = "Propositional circumscription by abstraction refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Does the query hold in every minimal model of the formula?
    Entails(EntailsArgs),
    /// Is a variable 0 in every minimal model of the formula?
    Ffn(FfnArgs),
    /// Compute all variables free for negation (the GCWA closure).
    Closure(ClosureArgs),
    /// Run the closure on every DIMACS file of a directory and print CSV.
    Bench(BenchArgs),
    /// Enumerate models, minimal models or free variables by brute force.
    Oracle(OracleArgs),
}

#[derive(Args, Clone, Debug, Default)]
struct BudgetArgs {
    /// Conflict budget for the whole run.
    #[arg(long, env = "CIRCA_CONFLICTS")]
    conflicts: Option<u64>,
    /// Time budget for the whole run, in milliseconds.
    #[arg(long, env = "CIRCA_TIMEOUT_MS")]
    timeout_ms: Option<u64>,
}

#[derive(Args, Clone, Debug)]
struct CommonArgs {
    /// Write a JSON report to this path (`-` for standard output, after the
    /// protocol lines).
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Seed for solver tie-breaking.
    #[arg(long, default_value_t = 0, env = "CIRCA_SEED")]
    seed: u64,
    /// Re-encode reduced formulas from scratch on every refinement.
    #[arg(long)]
    naive_encoding: bool,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("q").required(true).args(["query", "query_file"])))]
struct EntailsArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    /// Query expression, e.g. `!2 & (1 -> 3)`.
    #[arg(short, long)]
    query: Option<String>,
    /// File holding the query expression.
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Partition file with `min`, `fix` and `var` lines. Defaults to
    /// minimizing every variable.
    #[arg(short, long)]
    partition: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FfnArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    /// Variable index.
    var: u32,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Ms,
    Conflicts,
    Unlimited,
}

#[derive(Args, Clone, Debug)]
struct ScheduleArgs {
    /// Unit of the per-test budgets.
    #[arg(long, value_enum, default_value_t = Unit::Ms, env = "CIRCA_BUDGET_UNIT")]
    unit: Unit,
    /// Per-test budget of the first round.
    #[arg(long, env = "CIRCA_INITIAL_BUDGET")]
    initial: Option<u64>,
    /// Factor applied to the budget between rounds.
    #[arg(long, default_value_t = 2.0, env = "CIRCA_MULTIPLIER")]
    multiplier: f64,
    /// Largest per-test budget.
    #[arg(long, env = "CIRCA_MAX_BUDGET")]
    max: Option<u64>,
    /// Apply learned units only at round boundaries.
    #[arg(long)]
    round_boundary: bool,
    /// Test a round's variables in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct ClosureArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    /// Also print the closed formula in DIMACS to this path.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of DIMACS files.
    dir: PathBuf,
    /// Instances slower than this count as unsolved.
    #[arg(long, default_value_t = 30_000, env = "CIRCA_BENCH_BUDGET_MS")]
    budget_ms: u64,
    /// Instances run concurrently.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Accepted for compatibility; output is always CSV.
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OracleMode {
    Models,
    Minimal,
    Free,
}

#[derive(Args)]
struct OracleArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleMode::Minimal)]
    mode: OracleMode,
    /// Partition file for `minimal`.
    #[arg(short, long)]
    partition: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Entails(a) => commands::entails(a),
        Command::Ffn(a) => commands::ffn(a),
        Command::Closure(a) => commands::closure(a),
        Command::Bench(a) => bench::run(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
