//! Implementations of the `run`, `sweep`, and `table` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use flexsim_core::{
    parse_topology, simulate_gemm_with_cap, ArrayConfig, Dataflow, Error, GemmShape, Matrix,
    Topology,
};

use crate::config::{RunConfig, RunMode};
use crate::error::CliError;
use crate::report::{
    emit_speedup_table, parse_totals_csv, times_csv, ModelReport, ModelTotals,
};

/// What a subcommand hands back to `main` for printing.
#[derive(Debug)]
pub struct CommandOutput {
    /// Primary CSV payload (already written to disk when `wrote_file`).
    pub csv: String,
    /// True when `--out` consumed the CSV, so stdout should stay quiet.
    pub wrote_file: bool,
    /// Human-oriented summary for stderr.
    pub summary: String,
}

/// Read and parse a topology CSV, naming the model after the file stem.
pub fn load_topology(path: &Path) -> Result<Topology, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let model_name = path
        .file_stem()
        .and_then(|stem| stem.to_str())
        .unwrap_or("model");
    Ok(parse_topology(&text, model_name)?)
}

fn write_out(out: Option<&Path>, csv: &str) -> Result<bool, CliError> {
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(CliError::io(path))?;
            Ok(true)
        }
        None => Ok(false),
    }
}

fn require_topology(config: &RunConfig) -> Result<&Path, CliError> {
    config.topology.as_deref().ok_or_else(|| {
        CliError::Usage("a topology file is required (--topology or topology= in --config)".into())
    })
}

/// `run`: per-layer report for one model on one array.
pub fn run(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let path = require_topology(config)?;
    let topology = load_topology(path)?;
    let report = ModelReport::build(
        &topology,
        config.rows,
        config.cols,
        config.clock_ns_static,
        config.clock_ns_flex,
    )?;
    let mut summary = format!(
        "model {}: {} layers on a {}x{} array, mode {}\n  cycles {}, time {:.6} ms",
        report.model_name,
        report.layers.len(),
        report.rows,
        report.cols,
        config.dataflow.token(),
        report.total_cycles(config.dataflow),
        report.execution_time_ms(config.dataflow),
    );
    if let RunMode::Flex = config.dataflow {
        summary.push_str(&format!(
            "\n  speedup vs is {:.3}, os {:.3}, ws {:.3}",
            report.speedup_vs(Dataflow::InputStationary),
            report.speedup_vs(Dataflow::OutputStationary),
            report.speedup_vs(Dataflow::WeightStationary),
        ));
    }
    if config.verify {
        let (verified, skipped) = verify_report(&report, config)?;
        summary.push_str(&format!(
            "\n  verified {verified} layer(s) against the cycle-accurate simulator",
        ));
        if skipped > 0 {
            summary.push_str(&format!(" ({skipped} skipped by the trace cap)"));
        }
    }
    let csv = report.report_csv(config.dataflow);
    let wrote_file = write_out(config.out.as_deref(), &csv)?;
    Ok(CommandOutput {
        csv,
        wrote_file,
        summary,
    })
}

/// Deterministic operand matrices whose per-fold partial sums cannot
/// overflow the accumulator: entries stay within `min(operand_max,
/// sqrt(accum_max / k))`.
fn synthetic_operands(shape: GemmShape, array: &ArrayConfig) -> (Matrix, Matrix) {
    let budget = array.accum_max() / shape.k_inner as i64;
    let mut root = (budget as f64).sqrt() as i64;
    while (root + 1) * (root + 1) <= budget {
        root += 1;
    }
    while root > 0 && root * root > budget {
        root -= 1;
    }
    let bound = root.min(array.operand_max()).max(1);
    let span = 2 * bound + 1;
    let a = Matrix::from_fn(shape.t_rows, shape.k_inner, |i, j| {
        (i as i64 * 31 + j as i64 * 17 + 7) % span - bound
    });
    let b = Matrix::from_fn(shape.k_inner, shape.m_cols, |i, j| {
        (i as i64 * 13 + j as i64 * 29 + 3) % span - bound
    });
    (a, b)
}

fn schoolbook(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

/// Re-run every layer through the cycle-accurate simulator and cross-check
/// both the cycle count and the output matrix. Layers whose trace would
/// exceed the cap are skipped and counted.
fn verify_report(report: &ModelReport, config: &RunConfig) -> Result<(usize, usize), CliError> {
    let array = ArrayConfig {
        rows: report.rows,
        cols: report.cols,
        clock_period_ns: report.clock_ns_static,
        ..ArrayConfig::default()
    };
    let mut verified = 0;
    let mut skipped = 0;
    for layer in &report.layers {
        let dataflow = match config.dataflow {
            RunMode::Flex => layer.chosen,
            RunMode::Static(df) => df,
        };
        let expected = layer.report_for(dataflow);
        let (a, b) = synthetic_operands(layer.shape, &array);
        let sim = match simulate_gemm_with_cap(&a, &b, dataflow, &array, config.trace_cap) {
            Ok(sim) => sim,
            Err(Error::TraceCap { .. }) => {
                skipped += 1;
                continue;
            }
            Err(err) => return Err(err.into()),
        };
        if sim.total_cycles != expected.cycles {
            return Err(CliError::Verify {
                layer: layer.layer_name.clone(),
                dataflow,
                message: format!(
                    "simulated {} cycles but the analytical model says {}",
                    sim.total_cycles, expected.cycles
                ),
            });
        }
        if sim.ofmap.data() != schoolbook(&a, &b).data() {
            return Err(CliError::Verify {
                layer: layer.layer_name.clone(),
                dataflow,
                message: "simulated output disagrees with the schoolbook product".into(),
            });
        }
        verified += 1;
    }
    Ok((verified, skipped))
}

/// `sweep`: one report per array size, concatenated with size prefixes.
pub fn sweep(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let path = require_topology(config)?;
    let sizes = config.sizes.as_deref().ok_or_else(|| {
        CliError::Usage("sweep requires --sizes, e.g. --sizes 8x8,16x16,32x32".into())
    })?;
    let topology = load_topology(path)?;
    let mut reports = Vec::with_capacity(sizes.len());
    let mut summary = format!(
        "model {}: sweeping {} array size(s), mode {}",
        topology.model_name,
        sizes.len(),
        config.dataflow.token()
    );
    for &(rows, cols) in sizes {
        let report = ModelReport::build(
            &topology,
            rows,
            cols,
            config.clock_ns_static,
            config.clock_ns_flex,
        )?;
        summary.push_str(&format!(
            "\n  {rows}x{cols}: cycles {}, time {:.6} ms",
            report.total_cycles(config.dataflow),
            report.execution_time_ms(config.dataflow),
        ));
        reports.push(report);
    }
    let csv = crate::report::sweep_csv(&reports, config.dataflow);
    let wrote_file = write_out(config.out.as_deref(), &csv)?;
    Ok(CommandOutput {
        csv,
        wrote_file,
        summary,
    })
}

/// Inputs to the `table` subcommand.
pub struct TableRequest {
    /// Topology files to schedule and tabulate.
    pub topologies: Vec<PathBuf>,
    /// Pre-computed totals CSV to tabulate instead of (or additionally to)
    /// scheduling topologies.
    pub totals: Option<PathBuf>,
    pub rows: usize,
    pub cols: usize,
    pub clock_ns_static: f64,
    pub clock_ns_flex: f64,
    pub out: Option<PathBuf>,
    /// Optional extra output: execution times per model and mode.
    pub times_out: Option<PathBuf>,
}

/// `table`: static-vs-flexible speedups across models.
pub fn table(request: &TableRequest) -> Result<CommandOutput, CliError> {
    let mut totals: Vec<ModelTotals> = Vec::new();
    if let Some(path) = &request.totals {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        totals.extend(parse_totals_csv(&text)?);
    }
    for path in &request.topologies {
        let topology = load_topology(path)?;
        let report = ModelReport::build(
            &topology,
            request.rows,
            request.cols,
            request.clock_ns_static,
            request.clock_ns_flex,
        )?;
        totals.push(report.totals());
    }
    if totals.is_empty() {
        return Err(CliError::Usage(
            "table requires topology files and/or --totals <file>".into(),
        ));
    }
    let csv = emit_speedup_table(&totals)?;
    let wrote_file = write_out(request.out.as_deref(), &csv)?;
    if let Some(path) = &request.times_out {
        let times = times_csv(&totals, request.clock_ns_static, request.clock_ns_flex);
        fs::write(path, times).map_err(CliError::io(path))?;
    }
    let count = totals.len() as f64;
    let mean = |df: Dataflow| {
        totals
            .iter()
            .map(|t| t.cycles_for(df) as f64 / t.cycles_flex as f64)
            .sum::<f64>()
            / count
    };
    let summary = format!(
        "{} model(s): mean speedup vs is {:.3}, os {:.3}, ws {:.3}",
        totals.len(),
        mean(Dataflow::InputStationary),
        mean(Dataflow::OutputStationary),
        mean(Dataflow::WeightStationary),
    );
    Ok(CommandOutput {
        csv,
        wrote_file,
        summary,
    })
}
