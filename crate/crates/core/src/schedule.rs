//! Per-layer dataflow scheduling and the per-switch control program.
//!
//! The scheduler evaluates all three dataflows with the analytical model
//! for every layer and keeps the strict minimum; ties fall back to the
//! fixed preference order of `Dataflow::ALL`. Switching dataflow between
//! layers costs zero cycles in this model: the hardware reconfigures by
//! broadcasting one control word, which `emit_cmu_program` lays out next
//! to each layer's fold plan.

use crate::dataflow::{plan_folds, ArrayConfig, Dataflow, FoldPlan};
use crate::error::{Error, Result};
use crate::grid::{reconfigure, PinSource};
use crate::workload::{lower_to_gemm, Topology};

/// One scheduled layer: the chosen dataflow and all three candidate costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub layer_name: String,
    pub chosen: Dataflow,
    pub cycles_is: u64,
    pub cycles_os: u64,
    pub cycles_ws: u64,
}

impl ScheduleEntry {
    /// Cycle count of this layer under `dataflow`.
    pub fn cycles_for(&self, dataflow: Dataflow) -> u64 {
        match dataflow {
            Dataflow::InputStationary => self.cycles_is,
            Dataflow::OutputStationary => self.cycles_os,
            Dataflow::WeightStationary => self.cycles_ws,
        }
    }
}

/// A whole-network schedule with per-layer dataflow choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlexSchedule {
    pub model_name: String,
    pub entries: Vec<ScheduleEntry>,
    pub total_flex_cycles: u64,
}

impl FlexSchedule {
    /// Network total if every layer were forced onto one dataflow.
    pub fn static_total(&self, dataflow: Dataflow) -> u64 {
        self.entries.iter().map(|e| e.cycles_for(dataflow)).sum()
    }

    /// CSV rows of the schedule (`layer,chosen,cycles_is,cycles_os,cycles_ws`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,chosen,cycles_is,cycles_os,cycles_ws\n");
        for entry in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                entry.layer_name,
                entry.chosen.token(),
                entry.cycles_is,
                entry.cycles_os,
                entry.cycles_ws
            ));
        }
        out
    }
}

/// Choose the cheapest dataflow for every layer of `topology`.
pub fn build_schedule(topology: &Topology, array: &ArrayConfig) -> Result<FlexSchedule> {
    if topology.layers.is_empty() {
        return Err(Error::EmptyTopology(format!(
            "{:?} has no layers to schedule",
            topology.model_name
        )));
    }
    let mut entries = Vec::with_capacity(topology.layers.len());
    let mut total = 0u64;
    for layer in &topology.layers {
        let shape = lower_to_gemm(layer)?;
        let mut chosen = Dataflow::ALL[0];
        let mut best = u64::MAX;
        let mut per_df = [0u64; 3];
        for (slot, df) in Dataflow::ALL.into_iter().enumerate() {
            let cycles = plan_folds(shape, df, array)?.total_cycles();
            per_df[slot] = cycles;
            if cycles < best {
                best = cycles;
                chosen = df;
            }
        }
        let [cycles_os, cycles_ws, cycles_is] = per_df;
        total += best;
        entries.push(ScheduleEntry {
            layer_name: layer.name.clone(),
            chosen,
            cycles_is,
            cycles_os,
            cycles_ws,
        });
    }
    Ok(FlexSchedule {
        model_name: topology.model_name.clone(),
        entries,
        total_flex_cycles: total,
    })
}

/// Fold plans for each layer under its scheduled dataflow.
pub fn chosen_fold_plans(topology: &Topology, array: &ArrayConfig) -> Result<Vec<FoldPlan>> {
    let schedule = build_schedule(topology, array)?;
    topology
        .layers
        .iter()
        .zip(&schedule.entries)
        .map(|(layer, entry)| plan_folds(lower_to_gemm(layer)?, entry.chosen, array))
        .collect()
}

/// One control-manager row: the control word to broadcast before a layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmuRecord {
    pub layer_index: usize,
    pub layer_name: String,
    pub dataflow: Dataflow,
    pub control_bit: u8,
    pub pin_source: PinSource,
    pub fold_plan: FoldPlan,
}

/// The per-layer reconfiguration program for one network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmuProgram {
    pub records: Vec<CmuRecord>,
}

impl CmuProgram {
    /// CSV rows (`layer_index,layer_name,dataflow,control_bit,pin_source`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer_index,layer_name,dataflow,control_bit,pin_source\n");
        for record in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                record.layer_index,
                record.layer_name,
                record.dataflow.token(),
                record.control_bit,
                record.pin_source
            ));
        }
        out
    }
}

/// Pair a schedule with its fold plans into a control program. The two
/// must describe the same layers in the same order.
pub fn emit_cmu_program(schedule: &FlexSchedule, plans: &[FoldPlan]) -> Result<CmuProgram> {
    if schedule.entries.is_empty() {
        return Err(Error::ScheduleMismatch("schedule has no entries".into()));
    }
    if schedule.entries.len() != plans.len() {
        return Err(Error::ScheduleMismatch(format!(
            "{} schedule entries but {} fold plans",
            schedule.entries.len(),
            plans.len()
        )));
    }
    let mut records = Vec::with_capacity(plans.len());
    for (index, (entry, plan)) in schedule.entries.iter().zip(plans).enumerate() {
        if plan.dataflow != entry.chosen {
            return Err(Error::ScheduleMismatch(format!(
                "layer {index} ({}) scheduled {} but planned {}",
                entry.layer_name, entry.chosen, plan.dataflow
            )));
        }
        let config = reconfigure(entry.chosen);
        records.push(CmuRecord {
            layer_index: index,
            layer_name: entry.layer_name.clone(),
            dataflow: entry.chosen,
            control_bit: config.control_bit,
            pin_source: config.pin_source,
            fold_plan: *plan,
        });
    }
    Ok(CmuProgram { records })
}

/// Totals of a flexible schedule against each forced-static alternative.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticComparison {
    pub model_name: String,
    pub cycles_is: u64,
    pub cycles_os: u64,
    pub cycles_ws: u64,
    pub cycles_flex: u64,
    pub speedup_is: f64,
    pub speedup_os: f64,
    pub speedup_ws: f64,
}

/// Cycle-count speedup of a flexible run over a static one.
pub fn speedup(static_cycles: u64, flex_cycles: u64) -> f64 {
    static_cycles as f64 / flex_cycles as f64
}

/// Summarize a schedule as static-vs-flexible totals and speedups.
pub fn compare_static(schedule: &FlexSchedule) -> StaticComparison {
    let cycles_is = schedule.static_total(Dataflow::InputStationary);
    let cycles_os = schedule.static_total(Dataflow::OutputStationary);
    let cycles_ws = schedule.static_total(Dataflow::WeightStationary);
    let cycles_flex = schedule.total_flex_cycles;
    StaticComparison {
        model_name: schedule.model_name.clone(),
        cycles_is,
        cycles_os,
        cycles_ws,
        cycles_flex,
        speedup_is: speedup(cycles_is, cycles_flex),
        speedup_os: speedup(cycles_os, cycles_flex),
        speedup_ws: speedup(cycles_ws, cycles_flex),
    }
}
