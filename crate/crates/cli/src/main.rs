use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use balayage_cli::{configure_threads, fixture, list_fixtures, run_text, CliError, Outcome, Overrides, SCHEMA};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "balayage", version, about = "Balayage checks, constructions and hulls from JSON scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run(RunArgs),
    /// List the bundled scenarios, or print one.
    Fixtures {
        /// Print the scenario with this name.
        #[arg(long)]
        show: Option<String>,
    },
    /// Print the JSON schema of scenario files.
    Schema,
    /// Run a `construct` scenario and write the constructed measure.
    Construct(RunArgs),
    /// Run the Lyons-type counterexample and write the full report.
    Lyons {
        /// Quadrature level of the uniform components.
        #[arg(long, default_value_t = 128)]
        level: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    scenario: Option<PathBuf>,
    /// Name of a bundled scenario.
    #[arg(long)]
    fixture: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every tolerance of the scenario.
    #[arg(long)]
    eps: Option<f64>,
    /// Also write plot data as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            eps: self.eps,
        }
    }
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<(String, String), CliError> {
    match (&args.scenario, &args.fixture) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok((text, p.display().to_string()))
        }
        (None, Some(n)) => fixture(n)
            .map(|t| (t.to_string(), format!("fixture:{n}")))
            .ok_or_else(|| CliError::Invalid(format!("no bundled scenario named {n:?}"))),
        (None, None) => Err(CliError::Invalid("either --scenario or --fixture is required".into())),
    }
}

fn finish(out: &Outcome, common: &Common, body: &str) -> Result<u8, CliError> {
    write(common.out.as_deref(), body)?;
    if let Some(p) = &common.csv {
        write(Some(p), &out.csv)?;
    }
    Ok(out.exit_code())
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let (text, origin) = load(&args)?;
            let out = run_text(&text, &origin, args.common.overrides())?;
            finish(&out, &args.common, &out.render())
        }
        Command::Construct(args) => {
            let (text, origin) = load(&args)?;
            let out = run_text(&text, &origin, args.common.overrides())?;
            let product = out
                .product
                .as_ref()
                .ok_or_else(|| CliError::Invalid(format!("{origin}: not a construct scenario")))?;
            let mut body = serde_json::to_string_pretty(product).expect("charges serialize");
            body.push('\n');
            finish(&out, &args.common, &body)
        }
        Command::Lyons { level, common } => {
            let mut sc: serde_json::Value =
                serde_json::from_str(fixture("example5").expect("bundled")).expect("bundled fixture is JSON");
            sc["task"]["level"] = level.into();
            let out = run_text(&sc.to_string(), "lyons", common.overrides())?;
            finish(&out, &common, &out.render())
        }
        Command::Fixtures { show: Some(n) } => {
            let text = fixture(&n).ok_or_else(|| CliError::Invalid(format!("no bundled scenario named {n:?}")))?;
            print!("{text}");
            Ok(0)
        }
        Command::Fixtures { show: None } => {
            for n in list_fixtures() {
                println!("{n}");
            }
            Ok(0)
        }
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = std::env::var("BALAYAGE_THREADS").ok();
    let code = configure_threads(threads.as_deref()).and_then(|()| dispatch(cli));
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
