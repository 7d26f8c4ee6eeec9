//! `hhokit`: checks and searches for homogeneous Hamiltonian operators of
//! evolutionary systems described in TOML problem files.
//!
//! Exit codes: 0 pass, 1 a checked condition fails, 2 input error.

mod catalog;
mod error;
mod problem;
mod report;
mod tasks;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use problem::{Problem, ProblemFile, Task};
use report::Report;
use tasks::Options;

const JET_CAP_VAR: &str = "HHOKIT_JET_CAP";

#[derive(Parser)]
#[command(name = "hhokit", version, about = "Homogeneous Hamiltonian operator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Problem file (TOML).
    file: Option<PathBuf>,
    /// Use a built-in catalog entry instead of a file.
    #[arg(long)]
    example: Option<String>,
    /// Restrict to one named operator.
    #[arg(long)]
    operator: Option<String>,
    /// Operator order for bivector searches.
    #[arg(long)]
    order: Option<usize>,
    /// Degree bound for ansätze.
    #[arg(long)]
    degree: Option<usize>,
    /// Also write the structured report to this path (`-` for stdout only).
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Print every residual entry.
    #[arg(long)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Hamiltonian conditions of the operators.
    CheckOp(Common),
    /// Compatibility of the operators with the system.
    CheckCompat(Common),
    /// Bivectors of the system within an ansatz.
    FindBivectors(Common),
    /// Fluxes compatible with a second- or third-order operator.
    FindFluxes(Common),
    /// Linear degeneracy and diagonalizability of the system.
    Classify(Common),
    /// Potential form of a conservative system and its operators.
    Reduce(Common),
    /// Runs the task named in the problem file.
    Run(Common),
    /// Built-in examples.
    Examples {
        #[command(subcommand)]
        action: ExamplesCommand,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    /// Lists the catalog.
    List,
    /// Prints one entry.
    Show { name: String },
    /// Checks the golden expectations of one or all entries.
    Run {
        name: Option<String>,
        #[arg(long)]
        all: bool,
    },
}

fn jet_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(JET_CAP_VAR) {
        Err(_) => Ok(None),
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("{JET_CAP_VAR} must be a nonnegative integer, got '{s}'"))),
    }
}

/// The problem, its source text and a label for the report.
fn load(common: &Common) -> Result<(Problem, String, String), CliError> {
    let (src, label) = match (&common.file, &common.example) {
        (Some(path), None) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            (src, path.display().to_string())
        }
        (None, Some(name)) => {
            let entry = catalog::find(name)?;
            (entry.source.to_string(), format!("example:{}", entry.name))
        }
        _ => return Err(CliError::Input("give a problem file or --example NAME".into())),
    };
    let problem = ProblemFile::from_toml(&src).and_then(ProblemFile::build).map_err(|e| {
        let msg = e.render(Some(&src));
        CliError::Input(msg)
    })?;
    Ok((problem, src, label))
}

fn run_task(common: &Common, task: Option<Task>) -> Result<ExitCode, CliError> {
    let (problem, src, label) = load(common)?;
    let task = task
        .or(problem.file.task)
        .ok_or_else(|| CliError::Input("the problem file names no task".into()))?;
    let opts = Options {
        operator: common.operator.clone(),
        order: common.order,
        degree: common.degree,
        jet_cap: jet_cap()?,
        full: common.full,
    };
    let outcome = tasks::run(&problem, task, &opts)?;
    let pass = outcome.pass;
    let report = Report::new(&label, src.as_bytes(), problem.file.name.clone(), outcome);
    let mut stdout = std::io::stdout().lock();
    match &common.json {
        Some(p) if p.as_os_str() == "-" => {
            let _ = writeln!(stdout, "{}", report.to_json());
        }
        Some(p) => {
            std::fs::write(p, report.to_json() + "\n")
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            let _ = write!(stdout, "{}", report.to_text());
        }
        None => {
            let _ = write!(stdout, "{}", report.to_text());
        }
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn examples(action: &ExamplesCommand) -> Result<ExitCode, CliError> {
    let mut stdout = std::io::stdout().lock();
    match action {
        ExamplesCommand::List => {
            for e in catalog::CATALOG {
                let p = catalog::load(e)?;
                let _ = writeln!(stdout, "{:<26} {}", e.name, p.file.description.unwrap_or_default());
            }
            Ok(ExitCode::SUCCESS)
        }
        ExamplesCommand::Show { name } => {
            let _ = write!(stdout, "{}", catalog::show(catalog::find(name)?)?);
            Ok(ExitCode::SUCCESS)
        }
        ExamplesCommand::Run { name, all } => {
            let entries: Vec<&'static catalog::Entry> = match (name, all) {
                (Some(n), false) => vec![catalog::find(n)?],
                (None, true) => catalog::CATALOG.iter().collect(),
                _ => return Err(CliError::Input("give an example name or --all".into())),
            };
            let base = Options { jet_cap: jet_cap()?, ..Options::default() };
            let results = catalog::run_all(&entries, &base);
            let mut pass = true;
            for r in &results {
                pass &= r.pass;
                let _ = writeln!(stdout, "{}: {}", r.name, if r.pass { "ok" } else { "FAILED" });
                for line in &r.lines {
                    let _ = writeln!(stdout, "  {line}");
                }
            }
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CheckOp(c) => run_task(c, Some(Task::CheckOp)),
        Command::CheckCompat(c) => run_task(c, Some(Task::CheckCompat)),
        Command::FindBivectors(c) => run_task(c, Some(Task::FindBivectors)),
        Command::FindFluxes(c) => run_task(c, Some(Task::FindFluxes)),
        Command::Classify(c) => run_task(c, Some(Task::Classify)),
        Command::Reduce(c) => run_task(c, Some(Task::Reduce)),
        Command::Run(c) => run_task(c, None),
        Command::Examples { action } => examples(action),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
