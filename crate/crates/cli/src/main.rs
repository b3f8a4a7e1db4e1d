//! Command-line front end: validate scenario files, run simulations, and
//! render plots from the produced CSV series.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use civisim_core::{
    init_world, load_scenario, render_plot, run_replicates, write_graph_csv, write_run, Error,
    PlotSpec, WorldInputs,
};

/// Default parent directory for run outputs when --out is not given.
const OUT_DIR_ENV: &str = "CIVISIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "civisim", version, about = "Agent-based epidemic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV series, summary, and manifest.
    Run(RunArgs),
    /// Check a scenario file against all schema and range constraints.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Render selected series of a run CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the replicate count in the scenario file.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    replicates: Option<u32>,
    /// Overrides the root RNG seed in the scenario file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to $CIVISIM_OUT_DIR/<scenario-stem> or
    /// runs/<scenario-stem>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render phase and acceptance charts from the mean series.
    #[arg(long)]
    plots: bool,
    /// Also dump the initial social network of replicate 0 as an edge list.
    #[arg(long)]
    dump_graph: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// A per-replicate or mean CSV produced by `run`.
    #[arg(long)]
    csv: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated series names; defaults to the epidemic phase curves.
    #[arg(long, value_delimiter = ',')]
    series: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Plot(args) => cmd_plot(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report_error(&err);
            ExitCode::FAILURE
        }
    }
}

/// Violation lists get one line per violation; everything else one line.
fn report_error(err: &Error) {
    match err {
        Error::ScenarioInvalid { violations } => {
            eprintln!(
                "error: scenario violates {} constraint(s):",
                violations.len()
            );
            for v in violations {
                eprintln!("  {v}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn default_out_dir(scenario: &Path) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    let stem = scenario
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    base.join(stem)
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let mut config = load_scenario(&args.scenario)?;
    if let Some(n) = args.replicates {
        config.replicates = n;
    }
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    let scenario_bytes = std::fs::read(&args.scenario).map_err(|e| Error::io(&args.scenario, e))?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| default_out_dir(&args.scenario));

    let inputs = WorldInputs::load(&config)?;
    log::info!(
        "running {} replicate(s) of {} for {} days",
        config.replicates,
        args.scenario.display(),
        config.calendar.horizon_days
    );
    let result = run_replicates(&config, &inputs, config.replicates)?;
    let artifacts = write_run(&out_dir, &config, &scenario_bytes, &result)?;

    if args.dump_graph {
        let world = init_world(&config, &inputs, 0)?;
        write_graph_csv(&out_dir.join("graph_initial.csv"), &world.graph)?;
    }
    if args.plots {
        render_plot(
            &artifacts.mean_csv,
            &PlotSpec::phases(),
            &out_dir.join("mean_phases.svg"),
        )?;
        render_plot(
            &artifacts.mean_csv,
            &PlotSpec::acceptance(),
            &out_dir.join("mean_acceptance.svg"),
        )?;
    }

    let last = result.mean.last().expect("horizon >= 1");
    let peak = result
        .mean
        .iter()
        .map(|d| d.infectious + d.hospitalized + d.icu + d.quarantine)
        .fold(0.0f64, f64::max);
    println!(
        "wrote {} replicate series to {}",
        result.replicates.len(),
        out_dir.display()
    );
    println!(
        "population {}, peak infectious (mean) {:.1}, final dead (mean) {:.1}, final acceptance {:.3}",
        result.population_size, peak, last.dead, last.acceptance_level
    );
    Ok(())
}

fn cmd_validate(scenario: &Path) -> Result<(), Error> {
    load_scenario(scenario)?;
    println!("{}: ok", scenario.display());
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), Error> {
    let spec = if args.series.is_empty() {
        PlotSpec::phases()
    } else {
        PlotSpec {
            series: args.series.clone(),
            ..PlotSpec::phases()
        }
    };
    render_plot(&args.csv, &spec, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
