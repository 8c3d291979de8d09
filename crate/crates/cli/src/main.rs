//! `drrsim`: run, compare and validate scheduling scenarios.

mod compare;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drrsim_core::metrics::DelayBoundReading;
use drrsim_core::{validate_scenario, ScenarioConfig, SchedulerPolicy, ValidatedScenario};

#[derive(Parser)]
#[command(
    name = "drrsim",
    version,
    about = "Deficit round robin family simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate each (policy, seed) pair and write its reports.
    Run(RunArgs),
    /// Simulate each (policy, seed) pair and write a comparison table.
    Compare(RunArgs),
    /// Check a scenario and print it in normalized form.
    Validate {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
    },
}

#[derive(Args, Clone)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Scheduling policy; repeatable. Defaults to the scenario's policy
    /// (`run`) or all four (`compare`).
    #[arg(long = "policy", value_parser = parse_policy)]
    pub policies: Vec<SchedulerPolicy>,
    /// Seed; repeatable. Defaults to the scenario's seed.
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,
    /// Report formats to write; repeatable. Defaults to all.
    #[arg(long = "format", value_enum)]
    pub formats: Vec<Format>,
    #[arg(long)]
    pub interclass_gating: bool,
    #[arg(long)]
    pub literal_delay_bound: bool,
    #[arg(long)]
    pub zero_cost_failures: bool,
    /// With `run`, also write the comparison table.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

fn parse_policy(s: &str) -> Result<SchedulerPolicy, String> {
    s.parse()
}

pub enum Failure {
    Scenario(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Scenario(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Scenario(m) | Failure::Io(m) => m,
        }
    }
}

pub fn io_failure(what: impl std::fmt::Display, err: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{what}: {err}"))
}

/// Parses the file and applies command-line overrides before validating.
fn load(args: &RunArgs) -> Result<ValidatedScenario, Failure> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| io_failure(args.scenario.display(), e))?;
    let mut cfg = ScenarioConfig::from_toml(&text).map_err(|e| Failure::Scenario(e.to_string()))?;
    cfg.interclass_gating |= args.interclass_gating;
    cfg.zero_cost_failures |= args.zero_cost_failures;
    validate_scenario(&cfg).map_err(|e| Failure::Scenario(e.to_string()))
}

impl RunArgs {
    fn reading(&self) -> DelayBoundReading {
        if self.literal_delay_bound {
            DelayBoundReading::Literal
        } else {
            DelayBoundReading::Consistent
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.is_empty() || self.formats.contains(&f)
    }
}

fn run(args: &RunArgs, compare_only: bool) -> Result<(), Failure> {
    let scenario = load(args)?;
    let policies = match (args.policies.is_empty(), compare_only) {
        (false, _) => args.policies.clone(),
        (true, true) => SchedulerPolicy::ALL.to_vec(),
        (true, false) => vec![scenario.policy],
    };
    let seeds = if args.seeds.is_empty() {
        vec![scenario.seed]
    } else {
        args.seeds.clone()
    };
    std::fs::create_dir_all(&args.out).map_err(|e| io_failure(args.out.display(), e))?;

    let mut rows = Vec::new();
    for &policy in &policies {
        for &seed in &seeds {
            let run = output::simulate(&scenario, policy, seed, args.reading());
            if !compare_only {
                output::write_run(&run, &scenario, args)?;
            }
            println!("{}", run.one_line());
            rows.push(run);
        }
    }
    if compare_only || args.compare {
        compare::write(&rows, &policies, &seeds, &args.out)?;
    }
    Ok(())
}

fn validate(path: &PathBuf) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path.display(), e))?;
    let scenario =
        drrsim_core::load_scenario(&text).map_err(|e| Failure::Scenario(e.to_string()))?;
    print!("{}", scenario.to_toml());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Compare(args) => run(args, true),
        Command::Validate { scenario } => validate(scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
