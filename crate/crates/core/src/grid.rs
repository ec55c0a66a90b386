//! The reconfigurable PE grid.
//!
//! Every PE is a plain MAC unit plus one extra operand register and two
//! muxes, which is enough to serve all three dataflows from the same
//! physical array. Switching dataflow costs one broadcast control word:
//! a single control bit (accumulate-in-place or forward partial sums) and
//! a selector naming which operand, if any, the extra register pins.
//!
//! The grid steps synchronously with double-buffered PE registers: each
//! `step` reads the previous cycle's outputs and writes the next state, so
//! intra-cycle evaluation order cannot leak. Operand range checks happen
//! only at the array edges, where values are injected; partial sums and
//! accumulators are checked at every MAC against the accumulator width.

use std::fmt;
use std::mem;

use crate::dataflow::{ArrayConfig, Dataflow};
use crate::error::{Error, Result};

/// Which operand the PE's extra register pins under a dataflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinSource {
    IfMap,
    Weight,
    None,
}

impl fmt::Display for PinSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PinSource::IfMap => "ifmap",
            PinSource::Weight => "weight",
            PinSource::None => "none",
        })
    }
}

/// The per-dataflow control word broadcast to the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridConfig {
    pub dataflow: Dataflow,
    pub control_bit: u8,
    pub pin_source: PinSource,
}

/// Control word for one dataflow: output-stationary mode sets the
/// accumulate bit and pins nothing; the two stationary modes clear it and
/// differ only in the pinned operand.
pub fn reconfigure(dataflow: Dataflow) -> GridConfig {
    let (control_bit, pin_source) = match dataflow {
        Dataflow::InputStationary => (0, PinSource::IfMap),
        Dataflow::OutputStationary => (1, PinSource::None),
        Dataflow::WeightStationary => (0, PinSource::Weight),
    };
    GridConfig {
        dataflow,
        control_bit,
        pin_source,
    }
}

/// One processing element: MAC + accumulator + pinned-operand register
/// plus the east/south pipeline registers.
#[derive(Clone, Copy, Debug, Default)]
pub struct FlexPe {
    stationary: Option<i64>,
    acc: i64,
    east_out: Option<i64>,
    south_out: Option<i64>,
}

impl FlexPe {
    pub fn accumulator(&self) -> i64 {
        self.acc
    }

    pub fn stationary(&self) -> Option<i64> {
        self.stationary
    }
}

/// A finished value leaving the bottom edge on some cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Emission {
    pub col: usize,
    pub value: i64,
}

/// What one grid step produced.
#[derive(Clone, Debug, Default)]
pub struct StepEvents {
    /// Bottom-edge outputs, in ascending column order.
    pub emissions: Vec<Emission>,
    /// MAC operations performed this cycle.
    pub macs: u64,
}

/// The physical array, configured for one dataflow and one fold at a time.
#[derive(Clone, Debug)]
pub struct Grid {
    config: GridConfig,
    array: ArrayConfig,
    used_rows: usize,
    used_cols: usize,
    pes: Vec<FlexPe>,
    scratch: Vec<FlexPe>,
}

impl Grid {
    pub fn new(array: &ArrayConfig, dataflow: Dataflow) -> Result<Grid> {
        array.validate()?;
        let cells = array.rows * array.cols;
        Ok(Grid {
            config: reconfigure(dataflow),
            array: *array,
            used_rows: 0,
            used_cols: 0,
            pes: vec![FlexPe::default(); cells],
            scratch: vec![FlexPe::default(); cells],
        })
    }

    pub fn config(&self) -> GridConfig {
        self.config
    }

    pub fn rows(&self) -> usize {
        self.array.rows
    }

    pub fn cols(&self) -> usize {
        self.array.cols
    }

    pub fn used_rows(&self) -> usize {
        self.used_rows
    }

    pub fn used_cols(&self) -> usize {
        self.used_cols
    }

    pub fn pe(&self, row: usize, col: usize) -> &FlexPe {
        assert!(row < self.array.rows && col < self.array.cols);
        &self.pes[row * self.array.cols + col]
    }

    /// Accumulator of the PE at `(row, col)`.
    pub fn accumulator(&self, row: usize, col: usize) -> i64 {
        self.pe(row, col).acc
    }

    /// Pinned operand of the PE at `(row, col)`, if loaded.
    pub fn stationary(&self, row: usize, col: usize) -> Option<i64> {
        self.pe(row, col).stationary
    }

    /// Switch dataflow. Clears all PE state; a new fold must follow.
    pub fn reconfigure(&mut self, dataflow: Dataflow) {
        self.config = reconfigure(dataflow);
        self.reset();
        self.used_rows = 0;
        self.used_cols = 0;
    }

    fn reset(&mut self) {
        self.pes.fill(FlexPe::default());
        self.scratch.fill(FlexPe::default());
    }

    /// Start a fold on the top-left `used_rows x used_cols` sub-array.
    pub fn begin_fold(&mut self, used_rows: usize, used_cols: usize) -> Result<()> {
        if used_rows == 0
            || used_cols == 0
            || used_rows > self.array.rows
            || used_cols > self.array.cols
        {
            return Err(Error::validation(
                "fold",
                format!(
                    "fold extent {used_rows}x{used_cols} does not fit the {}x{} array",
                    self.array.rows, self.array.cols
                ),
            ));
        }
        self.used_rows = used_rows;
        self.used_cols = used_cols;
        self.reset();
        Ok(())
    }

    /// Load the pinned operand tile for a stationary-mode fold.
    /// `tile(i, j)` supplies the value for the PE at local `(i, j)`.
    pub fn load_stationary<F>(&mut self, mut tile: F) -> Result<()>
    where
        F: FnMut(usize, usize) -> i64,
    {
        if self.config.dataflow == Dataflow::OutputStationary {
            return Err(Error::Internal(
                "output-stationary mode has no stationary operand to load".into(),
            ));
        }
        if self.used_rows == 0 {
            return Err(Error::Internal("load_stationary before begin_fold".into()));
        }
        for i in 0..self.used_rows {
            for j in 0..self.used_cols {
                let value = tile(i, j);
                self.check_operand(value, "stationary")?;
                self.pes[i * self.array.cols + j].stationary = Some(value);
            }
        }
        Ok(())
    }

    fn check_operand(&self, value: i64, edge: &str) -> Result<()> {
        let max = self.array.operand_max();
        if value > max || value < -max - 1 {
            return Err(Error::validation(
                format!("{edge} operand"),
                format!(
                    "value {value} exceeds the {}-bit operand range",
                    self.array.operand_bits
                ),
            ));
        }
        Ok(())
    }

    fn mac(&self, base: i64, a: i64, b: i64, row: usize, col: usize, cycle: u64) -> Result<i64> {
        let value = a.checked_mul(b).and_then(|product| base.checked_add(product));
        let max = self.array.accum_max();
        match value {
            Some(v) if v <= max && v >= -max - 1 => Ok(v),
            _ => Err(Error::AccumulatorOverflow { row, col, cycle }),
        }
    }

    /// Advance one cycle, injecting `west[i]` at row `i` and (in
    /// output-stationary mode) `north[j]` at column `j`.
    #[allow(clippy::needless_range_loop)] // (i, j) index grid buffers, not just the edges
    pub fn step(
        &mut self,
        cycle: u64,
        west: &[Option<i64>],
        north: &[Option<i64>],
    ) -> Result<StepEvents> {
        if west.len() != self.used_rows || north.len() != self.used_cols {
            return Err(Error::Internal(format!(
                "edge vectors {}x{} do not match the active fold {}x{}",
                west.len(),
                north.len(),
                self.used_rows,
                self.used_cols
            )));
        }
        for value in west.iter().flatten() {
            self.check_operand(*value, "west")?;
        }
        if self.config.dataflow == Dataflow::OutputStationary {
            for value in north.iter().flatten() {
                self.check_operand(*value, "north")?;
            }
        } else if north.iter().any(Option::is_some) {
            return Err(Error::Internal(
                "stationary modes take no north-edge stream after preload".into(),
            ));
        }

        let mut events = StepEvents::default();
        let cols = self.array.cols;
        for i in 0..self.used_rows {
            for j in 0..self.used_cols {
                let west_val = if j == 0 {
                    west[i]
                } else {
                    self.pes[i * cols + (j - 1)].east_out
                };
                let north_val = if i == 0 {
                    if self.config.dataflow == Dataflow::OutputStationary {
                        north[j]
                    } else {
                        None
                    }
                } else {
                    self.pes[(i - 1) * cols + j].south_out
                };

                let mut pe = self.pes[i * cols + j];
                pe.east_out = west_val;
                match self.config.dataflow {
                    Dataflow::OutputStationary => match (west_val, north_val) {
                        (Some(a), Some(b)) => {
                            pe.acc = self.mac(pe.acc, a, b, i, j, cycle)?;
                            events.macs += 1;
                            pe.south_out = Some(b);
                        }
                        (None, None) => pe.south_out = None,
                        _ => {
                            return Err(Error::Internal(format!(
                                "operand misalignment at PE ({i},{j}) on cycle {cycle}"
                            )))
                        }
                    },
                    Dataflow::WeightStationary | Dataflow::InputStationary => match west_val {
                        Some(a) => {
                            if i > 0 && north_val.is_none() {
                                return Err(Error::Internal(format!(
                                    "partial sum missing at PE ({i},{j}) on cycle {cycle}"
                                )));
                            }
                            let stationary = pe.stationary.ok_or_else(|| {
                                Error::Internal(format!(
                                    "PE ({i},{j}) has no stationary operand on cycle {cycle}"
                                ))
                            })?;
                            let psum = north_val.unwrap_or(0);
                            let value = self.mac(psum, a, stationary, i, j, cycle)?;
                            events.macs += 1;
                            if i + 1 == self.used_rows {
                                events.emissions.push(Emission { col: j, value });
                                pe.south_out = None;
                            } else {
                                pe.south_out = Some(value);
                            }
                        }
                        None => {
                            if north_val.is_some() {
                                return Err(Error::Internal(format!(
                                    "orphaned partial sum at PE ({i},{j}) on cycle {cycle}"
                                )));
                            }
                            pe.south_out = None;
                        }
                    },
                }
                self.scratch[i * cols + j] = pe;
            }
        }
        mem::swap(&mut self.pes, &mut self.scratch);
        Ok(events)
    }

    /// Output-stationary drain: emit the bottom accumulator row, shift all
    /// accumulators one row south, zero-fill the top.
    pub fn drain_step(&mut self, _cycle: u64) -> Result<StepEvents> {
        if self.config.dataflow != Dataflow::OutputStationary {
            return Err(Error::Internal(
                "drain is only defined for the output-stationary mode".into(),
            ));
        }
        let mut events = StepEvents::default();
        let cols = self.array.cols;
        for j in 0..self.used_cols {
            events.emissions.push(Emission {
                col: j,
                value: self.pes[(self.used_rows - 1) * cols + j].acc,
            });
        }
        for i in 0..self.used_rows {
            for j in 0..self.used_cols {
                self.scratch[i * cols + j] = FlexPe {
                    acc: if i == 0 {
                        0
                    } else {
                        self.pes[(i - 1) * cols + j].acc
                    },
                    ..FlexPe::default()
                };
            }
        }
        mem::swap(&mut self.pes, &mut self.scratch);
        Ok(events)
    }

    /// Accumulators of the active fold area, row-major.
    pub fn dump_state(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::with_capacity(self.used_rows * self.used_cols);
        for i in 0..self.used_rows {
            for j in 0..self.used_cols {
                out.push((i, j, self.pes[i * self.array.cols + j].acc));
            }
        }
        out
    }
}
