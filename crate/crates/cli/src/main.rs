use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blab_core::exec::{configure_threads, Exec};
use blab_core::io::scenario::{example62_scenario, run, run_scenario_as, RunOutcome, Task};
use blab_core::GridSpec;
use clap::{Args, Parser, Subcommand};

/// Bergman kernels and Fubini–Study maps on the projective line.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 mathematical
/// failure. `BLAB_THREADS` caps the worker pool.
#[derive(Parser)]
#[command(name = "blab", version)]
struct Cli {
    /// Run every sweep on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task named in the scenario file.
    Run(ScenarioArgs),
    /// The degenerating diagonal family on O(d), d >= 4.
    Example62 {
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0")]
        t: Vec<f64>,
        /// Grid as `n_radii,n_angles`.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario file as a `kernel` task.
    Kernel(ScenarioArgs),
    /// Run a scenario file as a `section` task.
    Section(ScenarioArgs),
    /// Run a scenario file as a `kappa` task.
    Kappa(ScenarioArgs),
    /// Run a scenario file as a `spectrum` task.
    Spectrum(ScenarioArgs),
    /// Run a scenario file as a `classify` task.
    Classify(ScenarioArgs),
    /// Run a scenario file as an `fs` task.
    Fs(ScenarioArgs),
    /// Run a scenario file as a `phi` task.
    Phi(ScenarioArgs),
    /// Run a scenario file as a `path` task.
    Path(ScenarioArgs),
    /// Run a scenario file as a `fit` task.
    Fit(ScenarioArgs),
}

fn report(outcome: &RunOutcome, out: &Path) -> ExitCode {
    match &outcome.error {
        None => println!(
            "ok: wrote {} ({})",
            out.display(),
            outcome.artifacts.join(", ")
        ),
        Some(e) => eprintln!("{}: {e}", e.name()),
    }
    ExitCode::from(outcome.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var("BLAB_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                configure_threads(n);
            }
            _ => {
                eprintln!("InvalidScenario: BLAB_THREADS must be a positive integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };

    let (args, task) = match cli.command {
        Command::Example62 { d, t, grid, out } => {
            let grid = match grid.as_deref() {
                Some([n_radii, n_angles]) => match GridSpec::new(*n_radii, *n_angles) {
                    Ok(g) => Some(g),
                    Err(e) => {
                        eprintln!("{}: {e}", e.name());
                        return ExitCode::from(2);
                    }
                },
                Some(other) => {
                    eprintln!(
                        "InvalidScenario: --grid expects n_radii,n_angles, got {} values",
                        other.len()
                    );
                    return ExitCode::from(2);
                }
                None => None,
            };
            let scenario = example62_scenario(d, t, grid);
            let outcome = run(&scenario, None, Path::new("."), &out, exec);
            return report(&outcome, &out);
        }
        Command::Run(a) => (a, None),
        Command::Kernel(a) => (a, Some(Task::Kernel)),
        Command::Section(a) => (a, Some(Task::Section)),
        Command::Kappa(a) => (a, Some(Task::Kappa)),
        Command::Spectrum(a) => (a, Some(Task::Spectrum)),
        Command::Classify(a) => (a, Some(Task::Classify)),
        Command::Fs(a) => (a, Some(Task::Fs)),
        Command::Phi(a) => (a, Some(Task::Phi)),
        Command::Path(a) => (a, Some(Task::Path)),
        Command::Fit(a) => (a, Some(Task::Fit)),
    };
    let outcome = run_scenario_as(&args.scenario, task, &args.out, exec);
    report(&outcome, &args.out)
}
