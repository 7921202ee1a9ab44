//! `crossing`: single closed-loop runs and parameter sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use crossing_core::sim::{load_scenario_file, run_simulation, write_run_log, PlannerConfig, SimError};
use crossing_core::sweep::{emit_report, run_sweep, ReportFormat, SweepConfig, SweepError};

#[derive(Parser)]
#[command(
    name = "crossing",
    version,
    about = "POMDP intersection planner: simulations and parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation and print its step log as JSON lines.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file overriding planner parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a seeded parameter sweep and write a CSV report.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Parameter to sweep; repeat together with --values for several.
        #[arg(long, required = true)]
        param: Vec<String>,
        /// Comma-separated values of the matching --param.
        #[arg(long, required = true)]
        values: Vec<String>,
        /// Comma-separated time steps.
        #[arg(long, default_value = "1,0.5,0.25")]
        dt: String,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// JSON file with the settings of the parameters not swept.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG plot.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Sweep the full product of all parameter values.
        #[arg(long)]
        cartesian: bool,
        /// Report zero runtimes so that the CSV is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = if e.is_scenario_error() { 2 } else { 1 };
        Failure { code, error: e.into() }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Sim(e) => e.into(),
            e => config_error(e),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PlannerConfig, Failure> {
    let Some(path) = path else {
        return Ok(PlannerConfig::default());
    };
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(config_error)?;
    Ok(PlannerConfig::from_json(&bytes)?)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| config_error(anyhow!("{what}: cannot parse {s:?}: {e}")))
        })
        .collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(config_error)
}

fn simulate(scenario: &Path, dt: f64, seed: u64, config: Option<&Path>) -> Result<(), Failure> {
    let config = load_config(config)?;
    let scenario = load_scenario_file(scenario)?;
    let result = run_simulation(&scenario, &config, dt, seed)?;
    print!("{}", write_run_log(&result));
    eprintln!(
        "reward {:.3} crashed {} reached_goal {} steps {} runtime {:.3}s",
        result.normalized_reward, result.crashed, result.reached_goal, result.steps, result.wall_runtime
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            scenario,
            dt,
            seed,
            config,
        } => simulate(&scenario, dt, seed, config.as_deref()),
        Command::Sweep {
            scenario,
            param,
            values,
            dt,
            runs,
            seed,
            jobs,
            config,
            out,
            plot,
            cartesian,
            no_timing,
        } => {
            if param.len() != values.len() {
                return Err(config_error(anyhow!("every --param needs one --values list")));
            }
            let grid = param
                .into_iter()
                .zip(&values)
                .map(|(name, list)| Ok((name.clone(), parse_list(list, &name)?)))
                .collect::<Result<_, Failure>>()?;
            let mut sweep = SweepConfig::new(scenario, grid);
            sweep.dts = parse_list(&dt, "dt")?;
            sweep.runs_per_cell = runs;
            sweep.seed_base = seed;
            if let Some(jobs) = jobs {
                sweep.jobs = jobs;
            }
            sweep.base = load_config(config.as_deref())?;
            sweep.cartesian = cartesian;
            sweep.timing = !no_timing;
            let cells = run_sweep(&sweep)?;
            write(&out, &emit_report(&cells, ReportFormat::Csv)?)?;
            if let Some(plot) = plot {
                write(&plot, &emit_report(&cells, ReportFormat::Svg)?)?;
            }
            for cell in &cells {
                let params: Vec<String> = cell.params.iter().map(|(n, v)| format!("{n}={v}")).collect();
                eprintln!(
                    "{} dt={} mean_reward {:.1} crashes {}/{} failed {}",
                    params.join(" "),
                    cell.dt,
                    cell.mean_reward,
                    cell.crash_count,
                    cell.runs,
                    cell.failed_runs
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
