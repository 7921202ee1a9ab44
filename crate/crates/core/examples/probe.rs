//! Runs one scenario over a range of seeds and prints a per-run summary.
//!
//! `cargo run -p crossing-core --example probe -- <scenario> <dt> <runs> [key=value ...]`

use std::path::Path;

use crossing_core::sim::{load_scenario_file, run_simulation, write_run_log, PlannerConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = load_scenario_file(Path::new(&args[0])).expect("scenario");
    if args[1] == "curvature" {
        let path = scenario.world.path(scenario.ego.path);
        let params = PlannerConfig::default().domain.reward;
        let mut p = 0.0;
        while p < path.length() {
            let v = crossing_core::domain::desired_velocity(p, path, &params);
            println!("p {p:6.1} kappa {:.4} v_des {v:.2}", path.curvature(p));
            p += 1.0;
        }
        return;
    }
    let dt: f64 = args[1].parse().unwrap();
    let runs: u64 = args[2].parse().unwrap();
    let mut config = PlannerConfig::default();
    let mut verbose = false;
    for kv in &args[3..] {
        if kv == "-v" {
            verbose = true;
            continue;
        }
        let (k, v) = kv.split_once('=').unwrap();
        config = config.with_param(k, v.parse().unwrap()).unwrap();
    }
    let (mut crashes, mut total, mut time) = (0, 0.0, 0.0);
    for seed in 0..runs {
        let r = run_simulation(&scenario, &config, dt, seed).unwrap();
        println!(
            "seed {seed:3} reward {:9.1} crashed {} goal {} steps {} runtime {:.2}s",
            r.normalized_reward, r.crashed, r.reached_goal, r.steps, r.wall_runtime
        );
        if verbose {
            print!("{}", write_run_log(&r));
        }
        crashes += r.crashed as usize;
        total += r.normalized_reward;
        time += r.wall_runtime;
    }
    println!(
        "crashes {crashes}/{runs} mean reward {:.1} mean runtime {:.2}s",
        total / runs as f64,
        time / runs as f64
    );
}
