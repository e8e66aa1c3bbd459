//! Command-line front end: generate model files and run the two operating
//! scenarios end to end, writing the full report set.
//!
//! Exit codes of `run`: 0 when the scenario solved to proven optimality,
//! 2 when a solver budget was hit and the best incumbent was reported,
//! 3 when any stage was infeasible, 1 for configuration/I-O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use omtepf::builder::{build_mini, build_symmetrica, MiniConfig, SymmetricaLevels};
use omtepf::model::{ScenarioKind, TenModel};
use omtepf::scenario::{self, run_scenario, SolverChoice};
use omtepf::solve::{SolveOptions, Status};
use omtepf::Error;

#[derive(Parser)]
#[command(
    name = "omtepf",
    about = "Multi-modal transportation and electric power flow over timed Petri nets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one operating scenario on a model file and write reports.
    Run(RunArgs),
    /// Write one of the built-in instances to a model file.
    Model(ModelArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Model file (JSON, as written by `omtepf model`).
    #[arg(long)]
    model: PathBuf,
    /// Operating scenario.
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Optimization back end.
    #[arg(long, value_enum, default_value_t = SolverArg::Builtin)]
    solver: SolverArg,
    /// Output directory for the report files (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Truncate the day to its first N firing steps.
    #[arg(long)]
    horizon_steps: Option<usize>,
    /// Random seed, echoed into the run metadata. The built-in instances
    /// are deterministic; the seed is reserved for stochastic variants.
    #[arg(long)]
    seed: Option<u64>,
    /// Branch-and-bound node budget.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Which built-in instance to write.
    #[arg(long, value_enum)]
    kind: ModelKind,
    /// Destination model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Uncoordinated,
    Coordinated,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Builtin,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    /// Full-scale symmetric day-cycle instance (32 vehicles, 56 steps).
    Symmetrica,
    /// 4-buffer exhaustively checkable instance (2 vehicles, 12 steps).
    Mini,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                match e {
                    Error::Infeasible(_) | Error::InfeasibleFiring(_) | Error::SocBound(_) => {
                        ExitCode::from(3)
                    }
                    Error::SolverLimit(_) => ExitCode::from(2),
                    _ => ExitCode::from(1),
                }
            }
        },
        Command::Model(args) => match write_model(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn run(args: &RunArgs) -> omtepf::Result<ExitCode> {
    let mut model = TenModel::load(&args.model)?;
    if let Some(n) = args.horizon_steps {
        model.truncate_horizon(n)?;
    }

    let mut opts = SolveOptions::default();
    if let Some(n) = args.node_limit {
        opts.node_limit = n;
    }
    if let Some(s) = args.time_limit {
        opts.time_limit = s;
    }

    let scenario_kind = match args.scenario {
        ScenarioArg::Uncoordinated => ScenarioKind::Uncoordinated,
        ScenarioArg::Coordinated => ScenarioKind::Coordinated,
    };
    let solver = match args.solver {
        SolverArg::Builtin => SolverChoice::Builtin,
        SolverArg::External => SolverChoice::External,
    };

    let outcome = run_scenario(&model, scenario_kind, &opts, solver)?;
    let (_, catalog) = omtepf::builder::derive_net(&model)?;
    let files = scenario::report::write_reports(&args.out, &model, &catalog, &outcome)?;

    println!(
        "{} scenario on `{}` ({} steps, {} vehicles): status {:?}",
        match scenario_kind {
            ScenarioKind::Uncoordinated => "uncoordinated",
            ScenarioKind::Coordinated => "coordinated",
        },
        model.name,
        model.horizon,
        model.evs.len(),
        outcome.status,
    );
    println!(
        "objective {:.6} = transport {:.6} + grid {:.6}  ({:.2}s)",
        outcome.objective,
        outcome.transport_cost,
        outcome.dispatch.step_values.iter().sum::<f64>(),
        outcome.wall_secs,
    );
    if let Some(seed) = args.seed {
        println!("seed {seed} (recorded; the built-in instances are deterministic)");
    }
    println!("wrote {} report files to {}", files.len(), args.out.display());

    Ok(match outcome.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Limit => ExitCode::from(2),
        Status::Infeasible | Status::Unbounded => ExitCode::from(3),
    })
}

fn write_model(args: &ModelArgs) -> omtepf::Result<()> {
    let model = match args.kind {
        ModelKind::Symmetrica => build_symmetrica(&SymmetricaLevels::default())?,
        ModelKind::Mini => build_mini(&MiniConfig::default())?,
    };
    model.save(&args.out)?;
    println!(
        "wrote `{}` ({} buffers, {} vehicles, {} steps) to {}",
        model.name,
        model.buffers.len(),
        model.evs.len(),
        model.horizon,
        args.out.display()
    );
    Ok(())
}
