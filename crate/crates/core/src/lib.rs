//! Cost model and cycle-level simulator for systolic arrays with a
//! runtime-selectable dataflow (input, output, or weight stationary).
//!
//! The crate is organized around five pieces: [`workload`] lowers CNN layer
//! descriptors to GEMM shapes, [`dataflow`] maps a GEMM onto a PE array and
//! prices it (folds, cycles, SRAM traffic), [`trace`] expands a mapping into
//! a per-cycle operand injection schedule, [`grid`] and [`sim`] execute that
//! schedule on a register-accurate PE grid, and [`schedule`] picks the best
//! dataflow per layer and emits the control program for the reconfiguration
//! unit.

pub mod dataflow;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod schedule;
pub mod sim;
pub mod trace;
pub mod workload;

pub use dataflow::{
    analytical_cycles, count_memory_accesses, fold_cycles, plan_folds, ArrayConfig, Dataflow,
    FoldDims, FoldPlan, LayerCostReport, MemoryCounts, FLEX_CLOCK_NS, STATIC_CLOCK_NS,
};
pub use error::{Error, Result};
pub use grid::{reconfigure, Emission, FlexPe, Grid, GridConfig, PinSource, StepEvents};
pub use matrix::Matrix;
pub use schedule::{
    build_schedule, chosen_fold_plans, compare_static, emit_cmu_program, speedup, CmuProgram,
    CmuRecord, FlexSchedule, ScheduleEntry, StaticComparison,
};
pub use sim::{simulate_gemm, simulate_gemm_with_cap, simulate_gemm_with_dump, SimResult};
pub use trace::{
    generate_trace, generate_trace_capped, Operand, OperandTrace, Port, TraceRecord,
    DEFAULT_TRACE_CAP,
};
pub use workload::{
    lower_to_gemm, parse_topology, serialize_topology, GemmShape, LayerDescriptor, Topology,
};
