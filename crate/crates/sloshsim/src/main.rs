//! Command-line front end.
//!
//! Exit codes: 0 success, 2 rejected input (validation/parse), 1 runtime
//! failure (numerical breakdown, I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use sloshsim::calibrate::{calibrate, CalibrationBounds, DeConfig};
use sloshsim::error::{Error, Result};
use sloshsim::io::{parse_scenario, read_trace, write_report, write_trace};
use sloshsim::sim::{run, scenario_dimensionless, LoopMode, Scenario};

#[derive(Parser)]
#[command(
    name = "sloshsim",
    version,
    about = "Coupled spacecraft attitude / propellant-slosh simulation"
)]
struct Cli {
    /// Suppress informational notices (warnings still print).
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the trajectory trace.
    Simulate(SimulateArgs),
    /// Fit slosh parameters to a reference trace.
    Calibrate(CalibrateArgs),
    /// Print the dimensionless numbers of a scenario.
    Dimensionless(DimensionlessArgs),
    /// Summarize a trace into text and SVG figures.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,

    /// Force the maneuver profile as the rate source (no feedback).
    #[arg(long, conflicts_with = "closed_loop")]
    open_loop: bool,

    /// Force feedback control (needs a [control] section).
    #[arg(long)]
    closed_loop: bool,

    /// Output trace CSV.
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Scenario file (TOML); its slosh parameters are the search's start.
    scenario: PathBuf,

    /// Reference trace CSV to fit against.
    #[arg(long = "ref", value_name = "FILE")]
    reference: PathBuf,

    /// Output TOML with the fitted parameters.
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,

    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Population size (0 picks a size from the dimension).
    #[arg(long, default_value_t = 0)]
    population: usize,

    /// Generation cap.
    #[arg(long, default_value_t = 120)]
    generations: u32,

    /// Stop once the population objective spread falls below this.
    #[arg(long, default_value_t = 1e-10)]
    tol_spread: f64,

    /// Stop once the best objective falls below this.
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Args)]
struct DimensionlessArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Trace CSV produced by `simulate`.
    trace: PathBuf,

    /// Output directory for summary.txt and figures.
    #[arg(short, long, value_name = "DIR")]
    output: PathBuf,
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::max_level()
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().to_string().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(if cli.quiet {
        log::LevelFilter::Warn
    } else {
        log::LevelFilter::Info
    });

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Dimensionless(args) => cmd_dimensionless(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn pick_mode(scn: &Scenario, args: &SimulateArgs) -> Result<LoopMode> {
    if args.open_loop {
        return Ok(LoopMode::Open);
    }
    if args.closed_loop {
        if scn.control.is_none() {
            return Err(Error::validation(
                "--closed-loop needs a [control] section in the scenario",
            ));
        }
        return Ok(LoopMode::Closed);
    }
    // Default: use feedback whenever the scenario defines a controller.
    Ok(if scn.control.is_some() {
        LoopMode::Closed
    } else {
        LoopMode::Open
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let scn = parse_scenario(&args.scenario)?;
    let mode = pick_mode(&scn, &args)?;
    log::info!(
        "simulating {:?}: {} loop, t_end = {} s, dt = {} s, {} substeps",
        scn.name,
        match mode {
            LoopMode::Open => "open",
            LoopMode::Closed => "closed",
        },
        scn.t_end,
        scn.dt,
        scn.substeps
    );
    let trace = run(&scn, mode)?;
    write_trace(&trace, &args.output)?;
    let n = trace.len();
    println!(
        "wrote {} ({} samples, {} events, {:.2} s runtime)",
        args.output.display(),
        n,
        trace.events.len(),
        trace.meta.runtime_s.unwrap_or(0.0)
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let scn = parse_scenario(&args.scenario)?;
    let reference = read_trace(&args.reference)?;
    let de = DeConfig {
        population: args.population,
        max_generations: args.generations,
        tol_spread: args.tol_spread,
        target: args.target,
        seed: args.seed.unwrap_or(scn.seed),
        ..DeConfig::default()
    };
    let result = calibrate(&scn, &reference, &CalibrationBounds::default(), &de)?;
    let text = format!(
        "stationary_fraction = {}\nsurface_ratio = {}\nfriction_coeff = {}\nobjective = {:e}\ngenerations = {}\nevaluations = {}\nconverged = {}\n",
        result.stationary_fraction,
        result.surface_ratio,
        result.friction_coeff,
        result.objective,
        result.generations,
        result.evaluations,
        result.converged
    );
    std::fs::write(&args.output, text)?;
    println!(
        "wrote {} (objective {:.3e} after {} evaluations)",
        args.output.display(),
        result.objective,
        result.evaluations
    );
    Ok(())
}

fn cmd_dimensionless(args: DimensionlessArgs) -> Result<()> {
    let scn = parse_scenario(&args.scenario)?;
    let set = scenario_dimensionless(&scn)?;
    println!("ohnesorge = {:e}", set.ohnesorge);
    println!("bond_centrifugal = {:e}", set.bond_centrifugal);
    println!("bond_inertial = {:e}", set.bond_inertial);
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let trace = read_trace(&args.trace)?;
    let written = write_report(&trace, &args.output)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
