//! Seeded parameter studies.
//!
//! A sweep runs the same scenario under a grid of planner settings and time
//! steps. Run `i` of every cell uses seed `seed_base + i`, so cells share
//! their traffic noise and adding grid points never changes existing cells.

mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::sim::{load_scenario_file, run_simulation, PlannerConfig, Scenario, SimError};

pub use report::{emit_report, parse_csv, ReportFormat, ReportRow, CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("nothing to report")]
    EmptyReport,
    #[error("malformed report: {0}")]
    Parse(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub scenario: PathBuf,
    /// Swept parameters in report order, each with its values.
    pub grid: Vec<(String, Vec<f64>)>,
    pub runs_per_cell: usize,
    pub dts: Vec<f64>,
    /// Settings of every parameter that is not being swept.
    pub base: PlannerConfig,
    pub seed_base: u64,
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    /// Full product of the grid instead of one parameter at a time.
    pub cartesian: bool,
    /// Record wall-clock runtimes. Without it the runtime columns are zero
    /// and the report depends only on the configuration.
    pub timing: bool,
}

impl SweepConfig {
    /// Defaults: 50 runs per cell, Δt ∈ {1, 0.5, 0.25}, default planner,
    /// seed 0, one job per available core, one parameter at a time.
    pub fn new(scenario: impl Into<PathBuf>, grid: Vec<(String, Vec<f64>)>) -> Self {
        Self {
            scenario: scenario.into(),
            grid,
            runs_per_cell: 50,
            dts: vec![1.0, 0.5, 0.25],
            base: PlannerConfig::default(),
            seed_base: 0,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cartesian: false,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let invalid = |m: String| Err(SweepError::Invalid(m));
        if self.grid.is_empty() || self.grid.iter().any(|(_, v)| v.is_empty()) {
            return invalid("grid needs at least one value per parameter".into());
        }
        if self.runs_per_cell == 0 {
            return invalid("runs per cell must be positive".into());
        }
        if self.dts.is_empty() || self.dts.iter().any(|dt| !(*dt > 0.0 && dt.is_finite())) {
            return invalid("time steps must be positive".into());
        }
        if self.jobs == 0 {
            return invalid("jobs must be positive".into());
        }
        Ok(())
    }

    /// Parameter assignments of every cell, without the time step.
    pub fn grid_points(&self) -> Vec<Vec<(String, f64)>> {
        if !self.cartesian {
            return self
                .grid
                .iter()
                .flat_map(|(name, values)| values.iter().map(move |&v| vec![(name.clone(), v)]))
                .collect();
        }
        let mut points = vec![Vec::new()];
        for (name, values) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|point: Vec<(String, f64)>| {
                    values.iter().map(move |&v| {
                        let mut next = point.clone();
                        next.push((name.clone(), v));
                        next
                    })
                })
                .collect();
        }
        points
    }
}

/// Aggregate of all runs of one grid point at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub params: Vec<(String, f64)>,
    pub dt: f64,
    pub runs: usize,
    /// Mean normalized reward over the runs that completed.
    pub mean_reward: f64,
    pub crash_count: usize,
    /// Runs that panicked.
    pub failed_runs: usize,
    /// Mean wall-clock runtime (s).
    pub mean_runtime: f64,
    /// Mean number of simulated steps.
    pub mean_steps: f64,
    /// Runtime as a percentage of the simulated duration.
    pub realtime_pct: f64,
}

struct Outcome {
    reward: f64,
    crashed: bool,
    runtime: f64,
    steps: usize,
}

/// Loads the scenario file and runs the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepCell>, SweepError> {
    config.validate()?;
    let scenario = load_scenario_file(&config.scenario)?;
    run_sweep_on(&scenario, config)
}

/// Runs the sweep on an already loaded scenario. Cells are ordered by grid
/// point, then time step; the result does not depend on `jobs`.
pub fn run_sweep_on(scenario: &Scenario, config: &SweepConfig) -> Result<Vec<SweepCell>, SweepError> {
    config.validate()?;
    let mut cells = Vec::new();
    for point in config.grid_points() {
        let mut planner = config.base.clone();
        for (name, value) in &point {
            planner = planner.with_param(name, *value)?;
        }
        for &dt in &config.dts {
            cells.push((point.clone(), planner.clone(), dt));
        }
    }
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.runs_per_cell).map(move |r| (c, r)))
        .collect();
    let run = |&(c, r): &(usize, usize)| -> Result<Option<Outcome>, SimError> {
        let (_, planner, dt) = &cells[c];
        let seed = config.seed_base.wrapping_add(r as u64);
        match catch_unwind(AssertUnwindSafe(|| run_simulation(scenario, planner, *dt, seed))) {
            Ok(result) => result.map(|res| {
                Some(Outcome {
                    reward: res.normalized_reward,
                    crashed: res.crashed,
                    runtime: if config.timing { res.wall_runtime } else { 0.0 },
                    steps: res.steps,
                })
            }),
            Err(_) => Ok(None),
        }
    };
    let outcomes: Vec<Result<Option<Outcome>, SimError>> = if config.jobs == 1 {
        tasks.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| SweepError::Invalid(e.to_string()))?
            .install(|| tasks.par_iter().map(run).collect())
    };

    let mut outcomes = outcomes.into_iter();
    let mut report = Vec::with_capacity(cells.len());
    for (params, _, dt) in cells {
        let mut done = Vec::with_capacity(config.runs_per_cell);
        let mut failed_runs = 0;
        for outcome in outcomes.by_ref().take(config.runs_per_cell) {
            match outcome? {
                Some(o) => done.push(o),
                None => failed_runs += 1,
            }
        }
        report.push(aggregate(params, dt, config.runs_per_cell, &done, failed_runs));
    }
    Ok(report)
}

fn aggregate(params: Vec<(String, f64)>, dt: f64, runs: usize, done: &[Outcome], failed_runs: usize) -> SweepCell {
    let n = done.len() as f64;
    let mean = |f: &dyn Fn(&Outcome) -> f64| {
        if done.is_empty() {
            f64::NAN
        } else {
            done.iter().map(f).sum::<f64>() / n
        }
    };
    let mean_runtime = mean(&|o| o.runtime);
    let mean_steps = mean(&|o| o.steps as f64);
    SweepCell {
        params,
        dt,
        runs,
        mean_reward: mean(&|o| o.reward),
        crash_count: done.iter().filter(|o| o.crashed).count(),
        failed_runs,
        mean_runtime,
        mean_steps,
        realtime_pct: mean_runtime / (mean_steps * dt) * 100.0,
    }
}
