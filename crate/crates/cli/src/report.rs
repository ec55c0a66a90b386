//! Model-level reports and every CSV format the tool reads or writes.

use flexsim_core::{
    analytical_cycles, build_schedule, speedup, ArrayConfig, Dataflow, Error, FlexSchedule,
    GemmShape, LayerCostReport, Topology,
};

use crate::config::RunMode;

/// Header of per-layer report CSVs.
pub const REPORT_HEADER: &str =
    "layer,dataflow,cycles,folds,sram_reads_ifmap,sram_reads_filter,sram_writes_ofmap,psum_spills,utilization";

/// Header of model totals CSVs (`table --totals` input).
pub const TOTALS_HEADER: &str = "model,cycles_is,cycles_os,cycles_ws,cycles_flex";

/// Convert a cycle count to milliseconds at `clock_ns` per cycle.
pub fn execution_time_ms(cycles: u64, clock_ns: f64) -> f64 {
    cycles as f64 * clock_ns * 1e-6
}

/// Cost reports for one layer under all three dataflows.
#[derive(Clone, Debug)]
pub struct LayerReports {
    pub layer_name: String,
    pub shape: GemmShape,
    pub is: LayerCostReport,
    pub os: LayerCostReport,
    pub ws: LayerCostReport,
    pub chosen: Dataflow,
}

impl LayerReports {
    pub fn report_for(&self, dataflow: Dataflow) -> &LayerCostReport {
        match dataflow {
            Dataflow::InputStationary => &self.is,
            Dataflow::OutputStationary => &self.os,
            Dataflow::WeightStationary => &self.ws,
        }
    }

    pub fn chosen_report(&self) -> &LayerCostReport {
        self.report_for(self.chosen)
    }
}

/// Everything one invocation knows about a model on one array.
#[derive(Clone, Debug)]
pub struct ModelReport {
    pub model_name: String,
    pub rows: usize,
    pub cols: usize,
    pub clock_ns_static: f64,
    pub clock_ns_flex: f64,
    pub layers: Vec<LayerReports>,
    pub schedule: FlexSchedule,
}

impl ModelReport {
    /// Price every layer of `topology` under all three dataflows on a
    /// `rows x cols` array and schedule the flexible run.
    pub fn build(
        topology: &Topology,
        rows: usize,
        cols: usize,
        clock_ns_static: f64,
        clock_ns_flex: f64,
    ) -> flexsim_core::Result<ModelReport> {
        let array = ArrayConfig {
            rows,
            cols,
            clock_period_ns: clock_ns_static,
            ..ArrayConfig::default()
        };
        let schedule = build_schedule(topology, &array)?;
        let mut layers = Vec::with_capacity(topology.layers.len());
        for (layer, entry) in topology.layers.iter().zip(&schedule.entries) {
            let shape = flexsim_core::lower_to_gemm(layer)?;
            let price = |df| {
                analytical_cycles(shape, df, &array).map(|r| r.named(layer.name.clone()))
            };
            layers.push(LayerReports {
                layer_name: layer.name.clone(),
                shape,
                is: price(Dataflow::InputStationary)?,
                os: price(Dataflow::OutputStationary)?,
                ws: price(Dataflow::WeightStationary)?,
                chosen: entry.chosen,
            });
        }
        Ok(ModelReport {
            model_name: topology.model_name.clone(),
            rows,
            cols,
            clock_ns_static,
            clock_ns_flex,
            layers,
            schedule,
        })
    }

    /// Network cycle total under `mode`.
    pub fn total_cycles(&self, mode: RunMode) -> u64 {
        match mode {
            RunMode::Flex => self.schedule.total_flex_cycles,
            RunMode::Static(df) => self.schedule.static_total(df),
        }
    }

    /// Clock period applicable to `mode` (the flexible array runs a
    /// slightly slower clock to pay for its muxes).
    pub fn clock_ns(&self, mode: RunMode) -> f64 {
        match mode {
            RunMode::Flex => self.clock_ns_flex,
            RunMode::Static(_) => self.clock_ns_static,
        }
    }

    /// Wall-clock execution time of the network under `mode`.
    pub fn execution_time_ms(&self, mode: RunMode) -> f64 {
        execution_time_ms(self.total_cycles(mode), self.clock_ns(mode))
    }

    /// Cycle-count speedup of the flexible schedule over static `dataflow`.
    pub fn speedup_vs(&self, dataflow: Dataflow) -> f64 {
        speedup(
            self.schedule.static_total(dataflow),
            self.schedule.total_flex_cycles,
        )
    }

    /// Static and flexible cycle totals for the speedup table.
    pub fn totals(&self) -> ModelTotals {
        ModelTotals {
            model_name: self.model_name.clone(),
            cycles_is: self.schedule.static_total(Dataflow::InputStationary),
            cycles_os: self.schedule.static_total(Dataflow::OutputStationary),
            cycles_ws: self.schedule.static_total(Dataflow::WeightStationary),
            cycles_flex: self.schedule.total_flex_cycles,
        }
    }

    /// Per-layer CSV under `mode`, ending with a totals row whose
    /// utilization aggregates useful MACs over occupied MAC slots.
    pub fn report_csv(&self, mode: RunMode) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        let mut cycles = 0u64;
        let mut folds = 0u64;
        let mut reads_ifmap = 0u64;
        let mut reads_filter = 0u64;
        let mut writes_ofmap = 0u64;
        let mut spills = 0u64;
        let mut work = 0u64;
        for layer in &self.layers {
            let report = match mode {
                RunMode::Flex => layer.chosen_report(),
                RunMode::Static(df) => layer.report_for(df),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.6}\n",
                layer.layer_name,
                report.dataflow.token(),
                report.cycles,
                report.fold_count,
                report.memory.sram_reads_ifmap,
                report.memory.sram_reads_filter,
                report.memory.sram_writes_ofmap,
                report.memory.psum_spill_accesses,
                report.utilization
            ));
            cycles += report.cycles;
            folds += report.fold_count;
            reads_ifmap += report.memory.sram_reads_ifmap;
            reads_filter += report.memory.sram_reads_filter;
            writes_ofmap += report.memory.sram_writes_ofmap;
            spills += report.memory.psum_spill_accesses;
            work += layer.shape.macs();
        }
        let slots = (self.rows * self.cols) as u64 * cycles;
        let utilization = work as f64 / slots as f64;
        out.push_str(&format!(
            "total,{},{},{},{},{},{},{},{:.6}\n",
            mode.token(),
            cycles,
            folds,
            reads_ifmap,
            reads_filter,
            writes_ofmap,
            spills,
            utilization
        ));
        out
    }
}

/// One parsed row of a report CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub layer: String,
    pub dataflow: String,
    pub cycles: u64,
    pub folds: u64,
    pub sram_reads_ifmap: u64,
    pub sram_reads_filter: u64,
    pub sram_writes_ofmap: u64,
    pub psum_spills: u64,
    pub utilization: f64,
}

/// Parse a report CSV produced by [`ModelReport::report_csv`].
pub fn parse_report_csv(text: &str) -> flexsim_core::Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !header_seen {
            if trimmed != REPORT_HEADER {
                return Err(Error::Parse {
                    line,
                    message: "missing report header".into(),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line,
                message: format!("expected 9 columns, got {}", fields.len()),
            });
        }
        let int = |idx: usize| -> flexsim_core::Result<u64> {
            fields[idx].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad integer {:?}", fields[idx]),
            })
        };
        rows.push(ReportRow {
            layer: fields[0].to_string(),
            dataflow: fields[1].to_string(),
            cycles: int(2)?,
            folds: int(3)?,
            sram_reads_ifmap: int(4)?,
            sram_reads_filter: int(5)?,
            sram_writes_ofmap: int(6)?,
            psum_spills: int(7)?,
            utilization: fields[8].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad utilization {:?}", fields[8]),
            })?,
        });
    }
    Ok(rows)
}

/// Static and flexible cycle totals for one model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelTotals {
    pub model_name: String,
    pub cycles_is: u64,
    pub cycles_os: u64,
    pub cycles_ws: u64,
    pub cycles_flex: u64,
}

impl ModelTotals {
    pub fn cycles_for(&self, dataflow: Dataflow) -> u64 {
        match dataflow {
            Dataflow::InputStationary => self.cycles_is,
            Dataflow::OutputStationary => self.cycles_os,
            Dataflow::WeightStationary => self.cycles_ws,
        }
    }
}

/// Parse a totals CSV (`model,cycles_is,cycles_os,cycles_ws,cycles_flex`).
pub fn parse_totals_csv(text: &str) -> flexsim_core::Result<Vec<ModelTotals>> {
    let mut totals = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != TOTALS_HEADER {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header {TOTALS_HEADER:?}"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 columns, got {}", fields.len()),
            });
        }
        let int = |idx: usize| -> flexsim_core::Result<u64> {
            fields[idx].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad cycle count {:?}", fields[idx]),
            })
        };
        totals.push(ModelTotals {
            model_name: fields[0].to_string(),
            cycles_is: int(1)?,
            cycles_os: int(2)?,
            cycles_ws: int(3)?,
            cycles_flex: int(4)?,
        });
    }
    Ok(totals)
}

/// Speedup-table dataflow row order.
const TABLE_ORDER: [Dataflow; 3] = [
    Dataflow::InputStationary,
    Dataflow::OutputStationary,
    Dataflow::WeightStationary,
];

/// Render the static-vs-flexible speedup table: three rows per model
/// (is, os, ws) plus per-dataflow mean rows.
pub fn emit_speedup_table(totals: &[ModelTotals]) -> flexsim_core::Result<String> {
    if totals.is_empty() {
        return Err(Error::Validation {
            subject: "speedup table".into(),
            message: "no model totals to tabulate".into(),
        });
    }
    let mut out = String::from("model,flex_cycles,dataflow,static_cycles,speedup\n");
    let mut sums = [0f64; 3];
    for model in totals {
        for (slot, df) in TABLE_ORDER.into_iter().enumerate() {
            let static_cycles = model.cycles_for(df);
            let ratio = speedup(static_cycles, model.cycles_flex);
            sums[slot] += ratio;
            out.push_str(&format!(
                "{},{},{},{},{:.3}\n",
                model.model_name,
                model.cycles_flex,
                df.token(),
                static_cycles,
                ratio
            ));
        }
    }
    for (slot, df) in TABLE_ORDER.into_iter().enumerate() {
        out.push_str(&format!(
            "mean,,{},,{:.3}\n",
            df.token(),
            sums[slot] / totals.len() as f64
        ));
    }
    Ok(out)
}

/// Concatenate per-size reports with `rows,cols` prefix columns.
pub fn sweep_csv(reports: &[ModelReport], mode: RunMode) -> String {
    let mut out = format!("rows,cols,{REPORT_HEADER}\n");
    for report in reports {
        for line in report.report_csv(mode).lines().skip(1) {
            out.push_str(&format!("{},{},{line}\n", report.rows, report.cols));
        }
    }
    out
}

/// Execution times per model and mode (`model,mode,value`, ms).
pub fn times_csv(totals: &[ModelTotals], clock_ns_static: f64, clock_ns_flex: f64) -> String {
    let mut out = String::from("model,mode,value\n");
    for model in totals {
        let rows = [
            ("is", model.cycles_is, clock_ns_static),
            ("os", model.cycles_os, clock_ns_static),
            ("ws", model.cycles_ws, clock_ns_static),
            ("flex", model.cycles_flex, clock_ns_flex),
        ];
        for (mode, cycles, clock) in rows {
            out.push_str(&format!(
                "{},{mode},{:.6}\n",
                model.model_name,
                execution_time_ms(cycles, clock)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use flexsim_core::parse_topology;

    fn tiny_report() -> ModelReport {
        // One 2x2x2 layer on a 2x2 array: 6 cycles under every dataflow,
        // tie broken toward the output-stationary mode.
        let topo = parse_topology(
            "Name,IFMapH,IFMapW,FilterH,FilterW,Channels,NumFilters,Stride,Padding\n\
             l0,1,2,1,1,2,2,1,0\n",
            "tiny",
        )
        .unwrap();
        ModelReport::build(&topo, 2, 2, 6.63, 6.69).unwrap()
    }

    #[test]
    fn test_report_csv_golden() {
        let report = tiny_report();
        let csv = report.report_csv(RunMode::Flex);
        // 8 MACs over 4 PEs x 6 cycles = 1/3 utilization.
        assert_eq!(
            csv,
            "layer,dataflow,cycles,folds,sram_reads_ifmap,sram_reads_filter,sram_writes_ofmap,psum_spills,utilization\n\
             l0,os,6,1,4,4,4,0,0.333333\n\
             total,flex,6,1,4,4,4,0,0.333333\n"
        );
        let static_csv = report.report_csv(RunMode::Static(Dataflow::WeightStationary));
        assert!(static_csv.contains("l0,ws,6,1,"));
        assert!(static_csv.contains("total,ws,6,1,"));
    }

    #[test]
    fn test_report_csv_round_trip() {
        let report = tiny_report();
        let rows = parse_report_csv(&report.report_csv(RunMode::Flex)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].layer, "l0");
        assert_eq!(rows[0].dataflow, "os");
        assert_eq!(rows[0].cycles, 6);
        assert_eq!(rows[1].layer, "total");
        assert!((rows[1].utilization - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn test_parse_report_csv_rejects_bad_input() {
        assert!(matches!(
            parse_report_csv("nope\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = format!("{REPORT_HEADER}\nl0,os,6\n");
        assert!(matches!(
            parse_report_csv(&text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn test_execution_time_conversion() {
        assert!((execution_time_ms(1_636_000, 6.69) - 10.94484).abs() < 1e-9);
        assert!((execution_time_ms(2_839_000, 6.63) - 18.82257).abs() < 1e-9);
    }

    #[test]
    fn test_speedup_table_golden() {
        let totals = vec![ModelTotals {
            model_name: "m".into(),
            cycles_is: 300,
            cycles_os: 220,
            cycles_ws: 260,
            cycles_flex: 200,
        }];
        assert_eq!(
            emit_speedup_table(&totals).unwrap(),
            "model,flex_cycles,dataflow,static_cycles,speedup\n\
             m,200,is,300,1.500\n\
             m,200,os,220,1.100\n\
             m,200,ws,260,1.300\n\
             mean,,is,,1.500\n\
             mean,,os,,1.100\n\
             mean,,ws,,1.300\n"
        );
        assert!(emit_speedup_table(&[]).is_err());
    }

    #[test]
    fn test_totals_csv_round_trip() {
        let text = format!(
            "{TOTALS_HEADER}\n# comment\nalex,1176000,885200,1188000,859800\n"
        );
        let totals = parse_totals_csv(&text).unwrap();
        assert_eq!(totals.len(), 1);
        assert_eq!(totals[0].model_name, "alex");
        assert_eq!(totals[0].cycles_flex, 859_800);
        assert!(matches!(
            parse_totals_csv("model,flex\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = format!("{TOTALS_HEADER}\nalex,five,2,3,4\n");
        assert!(matches!(
            parse_totals_csv(&bad),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn test_times_csv_golden() {
        let totals = vec![ModelTotals {
            model_name: "m".into(),
            cycles_is: 1_000_000,
            cycles_os: 2_000_000,
            cycles_ws: 3_000_000,
            cycles_flex: 500_000,
        }];
        assert_eq!(
            times_csv(&totals, 6.63, 6.69),
            "model,mode,value\n\
             m,is,6.630000\n\
             m,os,13.260000\n\
             m,ws,19.890000\n\
             m,flex,3.345000\n"
        );
    }

    #[test]
    fn test_sweep_csv_prefixes_sizes() {
        let topo = parse_topology(
            "Name,IFMapH,IFMapW,FilterH,FilterW,Channels,NumFilters,Stride,Padding\n\
             l0,1,2,1,1,2,2,1,0\n",
            "tiny",
        )
        .unwrap();
        let reports = vec![
            ModelReport::build(&topo, 2, 2, 6.63, 6.69).unwrap(),
            ModelReport::build(&topo, 4, 4, 6.63, 6.69).unwrap(),
        ];
        let csv = sweep_csv(&reports, RunMode::Flex);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("rows,cols,{REPORT_HEADER}"));
        assert!(lines[1].starts_with("2,2,l0,"));
        assert!(lines[3].starts_with("4,4,l0,"));
        assert_eq!(lines.len(), 5);
    }
}
