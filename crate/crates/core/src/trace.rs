//! Cycle-stamped operand traces for the array edges.
//!
//! A trace lists, for every fold, which matrix element crosses which edge
//! port on which cycle: west ports take the row-streamed operand, north
//! ports take the column operand (or the preloaded stationary tile), and
//! south ports carry finished outputs. Traces drive the cycle-level
//! simulator and double as a golden reference for the analytical model,
//! since the last south-port stamp of a fold must land exactly on the
//! fold's final cycle.

use std::fmt;

use crate::dataflow::{fold_cycles, plan_folds, ArrayConfig, Dataflow, FoldPlan};
use crate::error::{Error, Result};
use crate::workload::GemmShape;

/// Upper bound on generated trace records before refusing to simulate.
pub const DEFAULT_TRACE_CAP: u64 = 4_000_000;

/// An array-edge port. Ordering is west, north, south, then port index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    /// Left edge, indexed by array row.
    West(usize),
    /// Top edge, indexed by array column.
    North(usize),
    /// Bottom edge, indexed by array column.
    South(usize),
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::West(i) => write!(f, "west:{i}"),
            Port::North(j) => write!(f, "north:{j}"),
            Port::South(j) => write!(f, "south:{j}"),
        }
    }
}

/// A matrix element crossing a port: A is the `t x k` input, B the `k x m`
/// filter, O the `t x m` output. `Bubble` marks an idle port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    A(usize, usize),
    B(usize, usize),
    O(usize, usize),
    Bubble,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::A(r, c) => write!(f, "A:{r}:{c}"),
            Operand::B(r, c) => write!(f, "B:{r}:{c}"),
            Operand::O(r, c) => write!(f, "O:{r}:{c}"),
            Operand::Bubble => f.write_str("bubble"),
        }
    }
}

/// One port crossing: `operand` passes `port` on `cycle`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub port: Port,
    pub operand: Operand,
}

/// Full trace of a GEMM, sorted by `(cycle, port)`; that pair is unique.
#[derive(Clone, Debug, PartialEq)]
pub struct OperandTrace {
    pub dataflow: Dataflow,
    pub records: Vec<TraceRecord>,
    pub total_cycles: u64,
}

impl OperandTrace {
    /// Look up the operand crossing `port` on `cycle` (`Bubble` if idle).
    pub fn operand_at(&self, cycle: u64, port: Port) -> Operand {
        match self
            .records
            .binary_search_by_key(&(cycle, port), |r| (r.cycle, r.port))
        {
            Ok(idx) => self.records[idx].operand,
            Err(_) => Operand::Bubble,
        }
    }

    /// Render the trace as CSV with a `cycle,port,operand` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,port,operand\n");
        for record in &self.records {
            out.push_str(&format!("{},{},{}\n", record.cycle, record.port, record.operand));
        }
        out
    }
}

/// Records a fold will generate: one per streamed element on each active
/// edge lane plus one per stationary (or drained) cell.
fn estimate_records(plan: &FoldPlan) -> u128 {
    let mut total = 0u128;
    for fr in 0..plan.row_folds {
        for fc in 0..plan.col_folds {
            let d = plan.fold_dims(fr, fc);
            total += d.stream_len as u128 * (d.used_rows + d.used_cols) as u128
                + d.used_rows as u128 * d.used_cols as u128;
        }
    }
    total
}

/// Generate the operand trace with the default record cap.
pub fn generate_trace(
    shape: GemmShape,
    dataflow: Dataflow,
    array: &ArrayConfig,
) -> Result<OperandTrace> {
    generate_trace_capped(shape, dataflow, array, DEFAULT_TRACE_CAP)
}

/// Generate the operand trace, refusing if it would exceed `cap` records.
pub fn generate_trace_capped(
    shape: GemmShape,
    dataflow: Dataflow,
    array: &ArrayConfig,
    cap: u64,
) -> Result<OperandTrace> {
    let plan = plan_folds(shape, dataflow, array)?;
    let required = estimate_records(&plan);
    if required > cap as u128 {
        return Err(Error::TraceCap { required, cap });
    }

    let mut records = Vec::with_capacity(required as usize);
    let mut base = 0u64;
    for fr in 0..plan.row_folds {
        for fc in 0..plan.col_folds {
            let dims = plan.fold_dims(fr, fc);
            let (rp, cp, s) = (dims.used_rows, dims.used_cols, dims.stream_len);
            let row_origin = fr * plan.array_rows;
            let col_origin = fc * plan.array_cols;
            match plan.dataflow {
                Dataflow::OutputStationary => {
                    // Outputs pinned: A rows skew in from the west, B columns
                    // from the north, accumulators drain south afterwards.
                    for i in 0..rp {
                        for kk in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (kk + i) as u64,
                                port: Port::West(i),
                                operand: Operand::A(row_origin + i, kk),
                            });
                        }
                    }
                    for j in 0..cp {
                        for kk in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (kk + j) as u64,
                                port: Port::North(j),
                                operand: Operand::B(kk, col_origin + j),
                            });
                        }
                    }
                    let drain_start = (s + rp + cp - 2) as u64;
                    for d in 0..rp {
                        for j in 0..cp {
                            records.push(TraceRecord {
                                cycle: base + drain_start + d as u64,
                                port: Port::South(j),
                                operand: Operand::O(row_origin + rp - 1 - d, col_origin + j),
                            });
                        }
                    }
                }
                Dataflow::WeightStationary => {
                    // B tile preloads through the north edge; A rows stream
                    // west with a one-cycle skew; outputs leave south.
                    for p in 0..rp {
                        for j in 0..cp {
                            records.push(TraceRecord {
                                cycle: base + p as u64,
                                port: Port::North(j),
                                operand: Operand::B(row_origin + p, col_origin + j),
                            });
                        }
                    }
                    for i in 0..rp {
                        for tt in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (rp + tt + i) as u64,
                                port: Port::West(i),
                                operand: Operand::A(tt, row_origin + i),
                            });
                        }
                    }
                    for j in 0..cp {
                        for tt in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (rp + tt + rp - 1 + j) as u64,
                                port: Port::South(j),
                                operand: Operand::O(tt, col_origin + j),
                            });
                        }
                    }
                }
                Dataflow::InputStationary => {
                    // A tile (transposed) preloads north; B rows stream west;
                    // output columns leave south.
                    for p in 0..rp {
                        for j in 0..cp {
                            records.push(TraceRecord {
                                cycle: base + p as u64,
                                port: Port::North(j),
                                operand: Operand::A(col_origin + j, row_origin + p),
                            });
                        }
                    }
                    for i in 0..rp {
                        for mm in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (rp + mm + i) as u64,
                                port: Port::West(i),
                                operand: Operand::B(row_origin + i, mm),
                            });
                        }
                    }
                    for j in 0..cp {
                        for mm in 0..s {
                            records.push(TraceRecord {
                                cycle: base + (rp + mm + rp - 1 + j) as u64,
                                port: Port::South(j),
                                operand: Operand::O(col_origin + j, mm),
                            });
                        }
                    }
                }
            }
            base += fold_cycles(dims);
        }
    }

    records.sort_by_key(|r| (r.cycle, r.port));
    Ok(OperandTrace {
        dataflow: plan.dataflow,
        records,
        total_cycles: base,
    })
}
