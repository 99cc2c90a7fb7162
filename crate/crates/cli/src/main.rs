use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use platoon_core::io::{
    default_scenario_text, emit_trajectory_plotdata, load_scenario, run_experiment, write_run, ExperimentPlan,
};
use platoon_core::sim::{run, ControllerKind, ScenarioSpec};
use platoon_core::{Error, Result};

/// Simulate platoon coordination at a signal-free four-leg intersection.
#[derive(Debug, Parser)]
#[command(name = "platoon-sim", version)]
struct Cli {
    /// Print the default scenario file and exit.
    #[arg(long)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// OC_Platoon, FCFS_Platoon, FCFS_Ind, OC_Ind or LQF_MWM.
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Seconds of arrivals to generate.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its vehicle CSV, summary JSON and event log.
    Run {
        /// Scenario file; the defaults are used when omitted.
        scenario: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Skip writing the event log.
        #[arg(long)]
        no_log: bool,
    },
    /// Run every (controller, max platoon size, seed) cell of the scenario's experiment section.
    Sweep {
        scenario: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Turn an event log into (t, p, v, u) samples of one platoon leader.
    Replay {
        log: PathBuf,
        #[arg(long)]
        platoon: u64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
}

fn scenario(path: Option<&Path>, o: &Overrides) -> Result<ScenarioSpec> {
    let mut spec = match path {
        Some(p) => load_scenario(p)?,
        None => ScenarioSpec::default(),
    };
    if let Some(seed) = o.seed {
        spec.experiment.seed = seed;
        spec.experiment.seeds = vec![seed];
    }
    if let Some(kind) = o.controller {
        spec.controller.kind = kind;
        spec.experiment.controllers = vec![kind];
    }
    if let Some(h) = o.horizon {
        spec.experiment.horizon = h;
    }
    if let Some(out) = &o.out {
        spec.experiment.output_dir = out.to_string_lossy().into_owned();
    }
    spec.validate()?;
    Ok(spec)
}

fn execute(cli: Cli) -> Result<()> {
    if cli.print_defaults {
        print!("{}", default_scenario_text());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::Configuration("no command given; see --help".into()));
    };
    match command {
        Command::Run {
            scenario: path,
            overrides,
            no_log,
        } => {
            let mut spec = scenario(path.as_deref(), &overrides)?;
            spec.experiment.record_log = !no_log;
            let result = run(&spec)?;
            let dir = PathBuf::from(&spec.experiment.output_dir);
            write_run(&dir, "run", &result)?;
            let s = &result.summary;
            println!(
                "{} seed {}: {} vehicles, mean travel {:.3} s, mean delay {:.3} s, mean fuel {:.3}, max lateness {:.3} s",
                s.controller, s.seed, s.exited_vehicles, s.average_travel_time, s.average_delay, s.average_fuel, s.max_lateness
            );
        }
        Command::Sweep {
            scenario: path,
            overrides,
        } => {
            let spec = scenario(path.as_deref(), &overrides)?;
            let plan = ExperimentPlan::from_scenario(&spec)?;
            let report = run_experiment(&plan)?;
            println!("controller,max_size,mean_travel_time,mean_fuel");
            for r in &report.rows {
                println!("{},{},{:.3},{:.3}", r.controller, r.max_size, r.mean_travel_time, r.mean_fuel);
            }
            println!("results in {}", plan.output_dir.display());
        }
        Command::Replay { log, platoon, dt, out } => {
            if dt.is_nan() || dt <= 0.0 {
                return Err(Error::Configuration("--dt must be positive".into()));
            }
            let text = fs::read_to_string(&log).map_err(|e| Error::Io(format!("{}: {e}", log.display())))?;
            let csv = emit_trajectory_plotdata(&text, platoon, dt)?;
            match out {
                Some(p) => fs::write(&p, csv).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
                None => print!("{csv}"),
            }
        }
        Command::Validate { scenario } => {
            load_scenario(&scenario)?;
            println!("{}: ok", scenario.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
