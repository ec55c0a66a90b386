//! `flexsim` binary: argument parsing and command dispatch.

use std::fs;
use std::path::PathBuf;
use std::process;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use flexsim_cli::config::{parse_sizes, RunConfig};
use flexsim_cli::error::CliError;
use flexsim_cli::run::{run, sweep, table, CommandOutput, TableRequest};

#[derive(Parser)]
#[command(
    name = "flexsim",
    version,
    about = "Dataflow cost model and cycle-accurate simulator for systolic arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report per-layer dataflow costs for one model on one array.
    Run(RunArgs),
    /// Repeat a model report across several array sizes.
    Sweep(SweepArgs),
    /// Tabulate static-vs-flexible speedups across models.
    Table(TableArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Topology CSV describing the model.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Array rows.
    #[arg(long)]
    rows: Option<usize>,
    /// Array columns.
    #[arg(long)]
    cols: Option<usize>,
    /// Execution mode: is, os, ws, or flex.
    #[arg(long)]
    dataflow: Option<String>,
    /// Static-array clock period in nanoseconds.
    #[arg(long)]
    clock_ns: Option<f64>,
    /// Flexible-array clock period in nanoseconds.
    #[arg(long)]
    flex_clock_ns: Option<f64>,
    /// Cross-check every layer against the cycle-accurate simulator.
    #[arg(long)]
    verify: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace-record budget per simulated layer under --verify.
    #[arg(long)]
    trace_cap: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Topology CSV describing the model.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Array sizes to sweep, e.g. 8x8,16x16,32.
    #[arg(long)]
    sizes: Option<String>,
    /// Execution mode: is, os, ws, or flex.
    #[arg(long)]
    dataflow: Option<String>,
    /// Static-array clock period in nanoseconds.
    #[arg(long)]
    clock_ns: Option<f64>,
    /// Flexible-array clock period in nanoseconds.
    #[arg(long)]
    flex_clock_ns: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Topology CSVs to schedule and tabulate.
    topologies: Vec<PathBuf>,
    /// Pre-computed totals CSV (model,cycles_is,cycles_os,cycles_ws,cycles_flex).
    #[arg(long)]
    totals: Option<PathBuf>,
    /// Array rows for scheduling topology files.
    #[arg(long, default_value_t = 32)]
    rows: usize,
    /// Array columns for scheduling topology files.
    #[arg(long, default_value_t = 32)]
    cols: usize,
    /// Static-array clock period in nanoseconds.
    #[arg(long)]
    clock_ns: Option<f64>,
    /// Flexible-array clock period in nanoseconds.
    #[arg(long)]
    flex_clock_ns: Option<f64>,
    /// Write the speedup table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write execution times (ms) per model and mode here.
    #[arg(long)]
    times_out: Option<PathBuf>,
}

/// Flag values that override the defaults and the config file.
#[derive(Default)]
struct FlagOverrides<'a> {
    config: Option<&'a PathBuf>,
    topology: Option<&'a PathBuf>,
    rows: Option<usize>,
    cols: Option<usize>,
    dataflow: Option<&'a str>,
    clock_ns: Option<f64>,
    flex_clock_ns: Option<f64>,
    verify: bool,
    out: Option<&'a PathBuf>,
    trace_cap: Option<u64>,
    sizes: Option<&'a str>,
}

/// Layer defaults, then the config file, then explicit flags.
fn resolve_run_config(flags: FlagOverrides) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = flags.config {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        config.apply_config_file(&text)?;
    }
    if let Some(path) = flags.topology {
        config.topology = Some(path.clone());
    }
    if let Some(rows) = flags.rows {
        config.rows = rows;
    }
    if let Some(cols) = flags.cols {
        config.cols = cols;
    }
    if let Some(mode) = flags.dataflow {
        config.dataflow = mode
            .parse()
            .map_err(|err| CliError::Usage(format!("--dataflow: {err}")))?;
    }
    if let Some(clock) = flags.clock_ns {
        config.clock_ns_static = clock;
    }
    if let Some(clock) = flags.flex_clock_ns {
        config.clock_ns_flex = clock;
    }
    if flags.verify {
        config.verify = true;
    }
    if let Some(path) = flags.out {
        config.out = Some(path.clone());
    }
    if let Some(cap) = flags.trace_cap {
        config.trace_cap = cap;
    }
    if let Some(text) = flags.sizes {
        config.sizes = Some(parse_sizes(text)?);
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<CommandOutput, CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = resolve_run_config(FlagOverrides {
                config: args.config.as_ref(),
                topology: args.topology.as_ref(),
                rows: args.rows,
                cols: args.cols,
                dataflow: args.dataflow.as_deref(),
                clock_ns: args.clock_ns,
                flex_clock_ns: args.flex_clock_ns,
                verify: args.verify,
                out: args.out.as_ref(),
                trace_cap: args.trace_cap,
                sizes: None,
            })?;
            run(&config)
        }
        Command::Sweep(args) => {
            let config = resolve_run_config(FlagOverrides {
                config: args.config.as_ref(),
                topology: args.topology.as_ref(),
                dataflow: args.dataflow.as_deref(),
                clock_ns: args.clock_ns,
                flex_clock_ns: args.flex_clock_ns,
                out: args.out.as_ref(),
                sizes: args.sizes.as_deref(),
                ..FlagOverrides::default()
            })?;
            sweep(&config)
        }
        Command::Table(args) => {
            let defaults = RunConfig::default();
            table(&TableRequest {
                topologies: args.topologies,
                totals: args.totals,
                rows: args.rows,
                cols: args.cols,
                clock_ns_static: args.clock_ns.unwrap_or(defaults.clock_ns_static),
                clock_ns_flex: args.flex_clock_ns.unwrap_or(defaults.clock_ns_flex),
                out: args.out,
                times_out: args.times_out,
            })
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(output) => {
            if !output.wrote_file {
                print!("{}", output.csv);
            }
            eprintln!("{}", output.summary);
        }
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(err.exit_code());
        }
    }
}
