use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trilab_core::analyzer::{Options, DEFAULT_BUDGET};
use trilab_core::engine::EngineError;
use trilab_core::scenario::{Scenario, ScenarioReport};
use trilab_core::Error;

mod shipped;

const BUDGET_ENV: &str = "TRILAB_BUDGET";

const EXIT_ERROR: u8 = 1;
const EXIT_BUDGET: u8 = 4;

/// Exact security analysis of three-party protocols.
#[derive(Debug, Parser)]
#[command(name = "trilab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the scenario once on explicit inputs and print the transcript.
    Run {
        #[command(flatten)]
        common: Common,
        /// Alice's input, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<u64>,
        /// Bob's input, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<u64>,
        /// Selects the random tapes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the scenario's security conditions exactly.
    ///
    /// Exits 0 when every condition holds, 2 when one is violated, 3 when one
    /// cannot be checked and 4 when the budget is too small.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Compare the real output distribution with the ideal model.
    AttackDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// List the scenarios built into the binary.
    ListScenarios,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file, or the name of a built-in scenario.
    #[arg(long)]
    scenario: String,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Engine(EngineError::BudgetExceeded { .. }) => ExitCode::from(EXIT_BUDGET),
                _ => ExitCode::from(EXIT_ERROR),
            }
        }
    }
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Run { common, x, y, seed } => {
            let scenario = load(&common.scenario)?;
            let record = scenario.run(&x, &y, seed)?;
            emit(&record, common.out.as_deref())?;
            Ok(0)
        }
        Command::Analyze { common, budget } => {
            let scenario = load(&common.scenario)?;
            let options = options(budget, &scenario)?;
            let report = scenario.analyze(&options)?;
            let code = report.status().exit_code() as u8;
            if let (Some(path), Some(dist)) = (&scenario.output.distribution, &report.distribution) {
                write_json(dist, path)?;
            }
            let out = common.out.as_deref().or(scenario.output.report.as_deref());
            emit(&ScenarioReport { scenario: &scenario, report }, out)?;
            Ok(code)
        }
        Command::AttackDemo { common, budget } => {
            let scenario = load(&common.scenario)?;
            let options = options(budget, &scenario)?;
            let report = scenario.attack_demo(&options)?;
            let out = common.out.as_deref().or(scenario.output.report.as_deref());
            emit(&ScenarioReport { scenario: &scenario, report }, out)?;
            Ok(0)
        }
        Command::ListScenarios => {
            for (name, text) in shipped::SCENARIOS {
                let scenario = Scenario::from_toml(text)?;
                println!("{name}\t{}", scenario.description);
            }
            Ok(0)
        }
    }
}

fn load(name: &str) -> Result<Scenario, Error> {
    let path = Path::new(name);
    if !path.exists() {
        if let Some(text) = shipped::find(name) {
            return Scenario::from_toml(text);
        }
    }
    Scenario::load(path)
}

/// Flag, then scenario, then environment, then the built-in default.
fn options(flag: Option<u128>, scenario: &Scenario) -> Result<Options, Error> {
    let env = match std::env::var(BUDGET_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u128>()
                .map_err(|_| Error::Scenario(format!("{BUDGET_ENV}={v:?} is not an atom count")))?,
        ),
        Err(_) => None,
    };
    let budget = flag.or(scenario.budget.map(u128::from)).or(env).unwrap_or(DEFAULT_BUDGET);
    if budget == 0 {
        return Err(Error::Scenario("budget must be positive".into()));
    }
    Ok(Options { budget, ..Options::default() })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    std::fs::write(path, to_json(value)).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => write_json(value, path),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}
