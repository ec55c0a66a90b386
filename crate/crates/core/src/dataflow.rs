//! Dataflow selection, fold planning, and the analytical cost model.
//!
//! A GEMM of shape `t x k x m` runs on an `R x C` array under one of three
//! dataflows. Each dataflow pins a different pair of GEMM dimensions to the
//! array axes and streams the third:
//!
//! | dataflow          | rows axis | cols axis | streamed |
//! |-------------------|-----------|-----------|----------|
//! | output stationary | t         | m         | k        |
//! | weight stationary | k         | m         | t        |
//! | input stationary  | k         | t         | m        |
//!
//! Work larger than the array is tiled into *folds* (row-major order over
//! the two pinned axes); edge folds use only part of the array. A fold on
//! `r' x c'` PEs streaming `s` elements per lane costs `s + 2r' + c' - 2`
//! cycles: skewed injection fills the wavefront, and the last result drains
//! from the far corner. The same expression holds for all three dataflows;
//! for the stationary variants the leading `r'` cycles are the preload.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::workload::GemmShape;

/// Clock period (ns) of the fixed-function baseline array.
pub const STATIC_CLOCK_NS: f64 = 6.63;
/// Clock period (ns) of the reconfigurable array (mux overhead included).
pub const FLEX_CLOCK_NS: f64 = 6.69;

/// Which GEMM operand stays resident in the PEs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dataflow {
    InputStationary,
    OutputStationary,
    WeightStationary,
}

impl Dataflow {
    /// All dataflows in scheduler tie-break preference order.
    pub const ALL: [Dataflow; 3] = [
        Dataflow::OutputStationary,
        Dataflow::WeightStationary,
        Dataflow::InputStationary,
    ];

    /// Short lowercase token used in CSV output and CLI flags.
    pub fn token(self) -> &'static str {
        match self {
            Dataflow::InputStationary => "is",
            Dataflow::OutputStationary => "os",
            Dataflow::WeightStationary => "ws",
        }
    }
}

impl fmt::Display for Dataflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Dataflow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "is" => Ok(Dataflow::InputStationary),
            "os" => Ok(Dataflow::OutputStationary),
            "ws" => Ok(Dataflow::WeightStationary),
            other => Err(Error::validation(
                "dataflow",
                format!("expected one of is/os/ws, got {other:?}"),
            )),
        }
    }
}

/// Physical array parameters shared by the cost model and the simulator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Clock period in nanoseconds, used for cycle-to-time conversion.
    pub clock_period_ns: f64,
    /// Width of the streamed operands (two's-complement signed).
    pub operand_bits: u32,
    /// Width of the PE accumulator (two's-complement signed).
    pub accum_bits: u32,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            rows: 32,
            cols: 32,
            clock_period_ns: STATIC_CLOCK_NS,
            operand_bits: 8,
            accum_bits: 32,
        }
    }
}

impl ArrayConfig {
    /// An `n x n` array with default clock and datapath widths.
    pub fn square(n: usize) -> Self {
        ArrayConfig {
            rows: n,
            cols: n,
            ..ArrayConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::validation("array config", "rows and cols must be >= 1"));
        }
        if !(self.clock_period_ns.is_finite() && self.clock_period_ns > 0.0) {
            return Err(Error::validation(
                "array config",
                format!("clock period must be positive, got {}", self.clock_period_ns),
            ));
        }
        if !(2..=32).contains(&self.operand_bits) {
            return Err(Error::validation(
                "array config",
                format!("operand width must be in 2..=32 bits, got {}", self.operand_bits),
            ));
        }
        if self.accum_bits < self.operand_bits || self.accum_bits > 63 {
            return Err(Error::validation(
                "array config",
                format!(
                    "accumulator width must be in {}..=63 bits, got {}",
                    self.operand_bits, self.accum_bits
                ),
            ));
        }
        Ok(())
    }

    /// Largest representable streamed operand magnitude.
    pub fn operand_max(&self) -> i64 {
        (1i64 << (self.operand_bits - 1)) - 1
    }

    /// Largest representable accumulator magnitude.
    pub fn accum_max(&self) -> i64 {
        (1i64 << (self.accum_bits - 1)) - 1
    }
}

/// Active extent of one fold: the PEs in use and the streamed length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldDims {
    pub used_rows: usize,
    pub used_cols: usize,
    pub stream_len: usize,
}

/// Tiling of one GEMM onto the array under a fixed dataflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldPlan {
    pub dataflow: Dataflow,
    /// GEMM dimension pinned to array rows.
    pub row_extent: usize,
    /// GEMM dimension pinned to array columns.
    pub col_extent: usize,
    /// GEMM dimension streamed through each fold.
    pub stream_len: usize,
    pub array_rows: usize,
    pub array_cols: usize,
    pub row_folds: usize,
    pub col_folds: usize,
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.row_folds * self.col_folds
    }

    /// Row-major fold coordinates for a flat fold index.
    pub fn fold_position(&self, index: usize) -> (usize, usize) {
        assert!(index < self.fold_count(), "fold index {index} out of range");
        (index / self.col_folds, index % self.col_folds)
    }

    /// Dimensions of the fold at `(fold_row, fold_col)`; edge folds shrink.
    pub fn fold_dims(&self, fold_row: usize, fold_col: usize) -> FoldDims {
        assert!(fold_row < self.row_folds && fold_col < self.col_folds);
        let span = |extent: usize, tile: usize, idx: usize| -> usize {
            let start = idx * tile;
            tile.min(extent - start)
        };
        FoldDims {
            used_rows: span(self.row_extent, self.array_rows, fold_row),
            used_cols: span(self.col_extent, self.array_cols, fold_col),
            stream_len: self.stream_len,
        }
    }

    /// Sum of per-fold cycle counts over the whole plan.
    pub fn total_cycles(&self) -> u64 {
        let mut total = 0u64;
        for fr in 0..self.row_folds {
            for fc in 0..self.col_folds {
                total += fold_cycles(self.fold_dims(fr, fc));
            }
        }
        total
    }
}

/// Map a GEMM onto the array under `dataflow`, tiling into folds.
pub fn plan_folds(shape: GemmShape, dataflow: Dataflow, array: &ArrayConfig) -> Result<FoldPlan> {
    shape.validate()?;
    array.validate()?;
    let (row_extent, col_extent, stream_len) = match dataflow {
        Dataflow::OutputStationary => (shape.t_rows, shape.m_cols, shape.k_inner),
        Dataflow::WeightStationary => (shape.k_inner, shape.m_cols, shape.t_rows),
        Dataflow::InputStationary => (shape.k_inner, shape.t_rows, shape.m_cols),
    };
    let ceil_div = |a: usize, b: usize| a.div_ceil(b);
    Ok(FoldPlan {
        dataflow,
        row_extent,
        col_extent,
        stream_len,
        array_rows: array.rows,
        array_cols: array.cols,
        row_folds: ceil_div(row_extent, array.rows),
        col_folds: ceil_div(col_extent, array.cols),
    })
}

/// Cycles to execute one fold: `stream + 2*rows + cols - 2`.
pub fn fold_cycles(dims: FoldDims) -> u64 {
    dims.stream_len as u64 + 2 * dims.used_rows as u64 + dims.used_cols as u64 - 2
}

/// SRAM traffic attributed to one GEMM under a fold plan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryCounts {
    pub sram_reads_ifmap: u64,
    pub sram_reads_filter: u64,
    pub sram_writes_ofmap: u64,
    /// Partial-sum writebacks and re-reads when the inner dimension folds.
    pub psum_spill_accesses: u64,
}

/// Count SRAM accesses for a fold plan.
///
/// Output-stationary folds re-read both operand tiles per fold but never
/// spill partial sums. The stationary variants keep one operand resident
/// (each of its elements is read exactly once across the plan) but must
/// spill and re-read partial sums whenever the inner dimension spans more
/// than one fold row.
pub fn count_memory_accesses(plan: &FoldPlan) -> MemoryCounts {
    let (t_rows, m_cols) = match plan.dataflow {
        Dataflow::OutputStationary => (plan.row_extent as u64, plan.col_extent as u64),
        Dataflow::WeightStationary => (plan.stream_len as u64, plan.col_extent as u64),
        Dataflow::InputStationary => (plan.col_extent as u64, plan.stream_len as u64),
    };
    let mut counts = MemoryCounts::default();
    for fr in 0..plan.row_folds {
        for fc in 0..plan.col_folds {
            let dims = plan.fold_dims(fr, fc);
            let (r, c, s) = (
                dims.used_rows as u64,
                dims.used_cols as u64,
                dims.stream_len as u64,
            );
            match plan.dataflow {
                Dataflow::OutputStationary => {
                    counts.sram_reads_ifmap += r * s;
                    counts.sram_reads_filter += c * s;
                }
                Dataflow::WeightStationary => {
                    counts.sram_reads_ifmap += s * r;
                    counts.sram_reads_filter += r * c;
                }
                Dataflow::InputStationary => {
                    counts.sram_reads_ifmap += r * c;
                    counts.sram_reads_filter += r * s;
                }
            }
        }
    }
    counts.sram_writes_ofmap = t_rows * m_cols;
    if plan.dataflow != Dataflow::OutputStationary {
        counts.psum_spill_accesses = 2 * t_rows * m_cols * (plan.row_folds as u64 - 1);
    }
    counts
}

/// Per-layer output of the analytical cost model.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCostReport {
    pub layer_name: String,
    pub dataflow: Dataflow,
    pub cycles: u64,
    pub fold_count: u64,
    pub memory: MemoryCounts,
    /// MAC-slot occupancy: useful MACs over `rows * cols * cycles`.
    pub utilization: f64,
}

impl LayerCostReport {
    /// Attach a layer name (the model computes shapes, not names).
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.layer_name = name.into();
        self
    }
}

/// Run the analytical cost model for one GEMM under one dataflow.
pub fn analytical_cycles(
    shape: GemmShape,
    dataflow: Dataflow,
    array: &ArrayConfig,
) -> Result<LayerCostReport> {
    let plan = plan_folds(shape, dataflow, array)?;
    let cycles = plan.total_cycles();
    let slots = array.rows as u64 * array.cols as u64 * cycles;
    Ok(LayerCostReport {
        layer_name: String::new(),
        dataflow,
        cycles,
        fold_count: plan.fold_count() as u64,
        memory: count_memory_accesses(&plan),
        utilization: shape.macs() as f64 / slots as f64,
    })
}
