//! Cycle-level GEMM execution on the PE grid, driven by operand traces.
//!
//! The simulator replays the injection schedule literally: each cycle it
//! looks up which matrix elements the trace stamps onto the west and north
//! edges, feeds them to the grid, and collects bottom-edge emissions. The
//! trace also says which output element must appear on which south port on
//! which cycle, and the simulator treats any disagreement — a missing
//! emission, an extra one, a coordinate mismatch — as a hard internal
//! error rather than a recoverable condition. Stationary-operand preloads
//! are counted as cycles but performed as register-file writes, not grid
//! steps.

use std::fmt::Write as _;

use crate::dataflow::{fold_cycles, plan_folds, ArrayConfig, Dataflow};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::Matrix;
use crate::trace::{generate_trace_capped, Operand, Port, TraceRecord, DEFAULT_TRACE_CAP};
use crate::workload::GemmShape;

/// Output of one simulated GEMM.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub ofmap: Matrix,
    pub total_cycles: u64,
    pub per_fold_cycles: Vec<u64>,
}

/// Simulate `a * b` under `dataflow` with the default trace cap.
pub fn simulate_gemm(
    a: &Matrix,
    b: &Matrix,
    dataflow: Dataflow,
    array: &ArrayConfig,
) -> Result<SimResult> {
    simulate_core(a, b, dataflow, array, DEFAULT_TRACE_CAP, None)
}

/// Simulate `a * b`, refusing GEMMs whose trace would exceed `cap` records.
pub fn simulate_gemm_with_cap(
    a: &Matrix,
    b: &Matrix,
    dataflow: Dataflow,
    array: &ArrayConfig,
    cap: u64,
) -> Result<SimResult> {
    simulate_core(a, b, dataflow, array, cap, None)
}

/// Simulate and append a per-cycle accumulator dump (CSV with a
/// `cycle,row,col,acc` header; coordinates are grid-local) to `dump`.
pub fn simulate_gemm_with_dump(
    a: &Matrix,
    b: &Matrix,
    dataflow: Dataflow,
    array: &ArrayConfig,
    dump: &mut String,
) -> Result<SimResult> {
    simulate_core(a, b, dataflow, array, DEFAULT_TRACE_CAP, Some(dump))
}

fn operand_value(a: &Matrix, b: &Matrix, operand: Operand, cycle: u64) -> Result<i64> {
    match operand {
        Operand::A(r, c) => Ok(a.get(r, c)),
        Operand::B(r, c) => Ok(b.get(r, c)),
        other => Err(Error::Internal(format!(
            "non-input operand {other} stamped on an input port at cycle {cycle}"
        ))),
    }
}

fn simulate_core(
    a: &Matrix,
    b: &Matrix,
    dataflow: Dataflow,
    array: &ArrayConfig,
    cap: u64,
    mut dump: Option<&mut String>,
) -> Result<SimResult> {
    if a.cols() != b.rows() {
        return Err(Error::validation(
            "operand matrices",
            format!(
                "A is {}x{} but B is {}x{}; inner dimensions must agree",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        ));
    }
    let shape = GemmShape::new(a.rows(), a.cols(), b.cols());
    let plan = plan_folds(shape, dataflow, array)?;
    let trace = generate_trace_capped(shape, dataflow, array, cap)?;
    let mut grid = Grid::new(array, dataflow)?;
    let mut ofmap = Matrix::new(shape.t_rows, shape.m_cols);

    if let Some(out) = dump.as_deref_mut() {
        out.push_str("cycle,row,col,acc\n");
    }

    let records = &trace.records;
    let mut pointer = 0usize;
    let mut per_fold_cycles = Vec::with_capacity(plan.fold_count());
    let mut global_cycle = 0u64;
    let mut total_macs = 0u64;
    let mut outputs_seen = 0u64;

    for index in 0..plan.fold_count() {
        let (fr, fc) = plan.fold_position(index);
        let dims = plan.fold_dims(fr, fc);
        let (rp, cp) = (dims.used_rows, dims.used_cols);
        grid.begin_fold(rp, cp)?;

        // Stationary tiles load through the register files while the trace
        // stamps the corresponding north-edge preload cycles.
        let preload_cycles = match dataflow {
            Dataflow::OutputStationary => 0u64,
            Dataflow::WeightStationary => {
                grid.load_stationary(|i, j| {
                    b.get(fr * plan.array_rows + i, fc * plan.array_cols + j)
                })?;
                rp as u64
            }
            Dataflow::InputStationary => {
                grid.load_stationary(|i, j| {
                    a.get(fc * plan.array_cols + j, fr * plan.array_rows + i)
                })?;
                rp as u64
            }
        };

        let n_cycles = fold_cycles(dims);
        for local_cycle in 0..n_cycles {
            let cycle = global_cycle + local_cycle;
            let start = pointer;
            while pointer < records.len() && records[pointer].cycle == cycle {
                pointer += 1;
            }
            let cycle_records = &records[start..pointer];

            if local_cycle < preload_cycles {
                let all_north = cycle_records
                    .iter()
                    .all(|r| matches!(r.port, Port::North(_)));
                if cycle_records.len() != cp || !all_north {
                    return Err(Error::Internal(format!(
                        "preload schedule malformed on cycle {cycle}"
                    )));
                }
            } else {
                let mut west = vec![None; rp];
                let mut north = vec![None; cp];
                let mut south: Vec<&TraceRecord> = Vec::new();
                for record in cycle_records {
                    match record.port {
                        Port::West(i) => {
                            west[i] = Some(operand_value(a, b, record.operand, cycle)?)
                        }
                        Port::North(j) => {
                            north[j] = Some(operand_value(a, b, record.operand, cycle)?)
                        }
                        Port::South(_) => south.push(record),
                    }
                }

                let draining = dataflow == Dataflow::OutputStationary && !south.is_empty();
                let events = if draining {
                    if west.iter().any(Option::is_some) || north.iter().any(Option::is_some) {
                        return Err(Error::Internal(format!(
                            "drain overlaps streaming on cycle {cycle}"
                        )));
                    }
                    grid.drain_step(cycle)?
                } else {
                    grid.step(cycle, &west, &north)?
                };
                total_macs += events.macs;

                if events.emissions.len() != south.len() {
                    return Err(Error::Internal(format!(
                        "{} emissions but {} output stamps on cycle {cycle}",
                        events.emissions.len(),
                        south.len()
                    )));
                }
                for (emission, record) in events.emissions.iter().zip(&south) {
                    let Port::South(port_col) = record.port else {
                        return Err(Error::Internal(format!(
                            "non-south record in output list on cycle {cycle}"
                        )));
                    };
                    if emission.col != port_col {
                        return Err(Error::Internal(format!(
                            "emission on port {} but stamp on port {port_col} at cycle {cycle}",
                            emission.col
                        )));
                    }
                    let Operand::O(out_row, out_col) = record.operand else {
                        return Err(Error::Internal(format!(
                            "input operand stamped on a south port at cycle {cycle}"
                        )));
                    };
                    let sum = ofmap
                        .get(out_row, out_col)
                        .checked_add(emission.value)
                        .ok_or_else(|| {
                            Error::validation(
                                "output accumulation",
                                format!("output ({out_row},{out_col}) overflows 64 bits"),
                            )
                        })?;
                    ofmap.set(out_row, out_col, sum);
                    outputs_seen += 1;
                }
            }

            if let Some(out) = dump.as_deref_mut() {
                for (i, j, acc) in grid.dump_state() {
                    let _ = writeln!(out, "{cycle},{i},{j},{acc}");
                }
            }
        }
        per_fold_cycles.push(n_cycles);
        global_cycle += n_cycles;
    }

    if pointer != records.len() {
        return Err(Error::Internal(format!(
            "{} trace records were never consumed",
            records.len() - pointer
        )));
    }
    if global_cycle != trace.total_cycles {
        return Err(Error::Internal(
            "simulated cycle count disagrees with the trace".into(),
        ));
    }
    if total_macs != shape.macs() {
        return Err(Error::Internal(format!(
            "performed {total_macs} MACs for a {shape} GEMM ({} expected)",
            shape.macs()
        )));
    }
    let expected_outputs = match dataflow {
        Dataflow::OutputStationary => shape.t_rows as u64 * shape.m_cols as u64,
        _ => plan.row_folds as u64 * shape.t_rows as u64 * shape.m_cols as u64,
    };
    if outputs_seen != expected_outputs {
        return Err(Error::Internal(format!(
            "collected {outputs_seen} outputs, expected {expected_outputs}"
        )));
    }

    Ok(SimResult {
        ofmap,
        total_cycles: global_cycle,
        per_fold_cycles,
    })
}
