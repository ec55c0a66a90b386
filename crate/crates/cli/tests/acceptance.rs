//! Acceptance suite: eight end-to-end criteria covering simulator
//! fidelity, scheduling, reference speedups, and output reproducibility.
//! Each test prints one `[acceptance] criterion N (...): PASS/FAIL` line
//! (visible under `cargo test --test acceptance -- --nocapture`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use flexsim_cli::report::{execution_time_ms, ModelReport};
use flexsim_core::{
    analytical_cycles, build_schedule, simulate_gemm, speedup, ArrayConfig, Dataflow, GemmShape,
    LayerDescriptor, Matrix, Topology, FLEX_CLOCK_NS, STATIC_CLOCK_NS,
};

fn pass(number: u32, name: &str) {
    println!("[acceptance] criterion {number} ({name}): PASS");
}

fn fail(number: u32, name: &str, detail: &str) -> ! {
    println!("[acceptance] criterion {number} ({name}): FAIL — {detail}");
    panic!("criterion {number} ({name}) failed: {detail}");
}

fn resnet_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../topologies/resnet18.csv")
}

fn load_resnet() -> Topology {
    let text = fs::read_to_string(resnet_path()).expect("resnet18 fixture should exist");
    flexsim_core::parse_topology(&text, "resnet18").expect("resnet18 fixture should parse")
}

fn schoolbook(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
    })
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-9..=9))
}

/// Criterion 1: on random GEMMs and array sizes, the cycle-accurate
/// simulator reproduces the schoolbook product and the analytical cycle
/// count under every dataflow.
#[test]
fn criterion_1_random_gemm_cross_check() {
    const N: u32 = 1;
    const NAME: &str = "random gemm cross-check";
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC1);
    for trial in 0..500 {
        let shape = GemmShape::new(
            rng.gen_range(1..=16),
            rng.gen_range(1..=16),
            rng.gen_range(1..=16),
        );
        let array = ArrayConfig {
            rows: rng.gen_range(1..=8),
            cols: rng.gen_range(1..=8),
            ..ArrayConfig::default()
        };
        let a = random_matrix(&mut rng, shape.t_rows, shape.k_inner);
        let b = random_matrix(&mut rng, shape.k_inner, shape.m_cols);
        let expected = schoolbook(&a, &b);
        for dataflow in Dataflow::ALL {
            let sim = match simulate_gemm(&a, &b, dataflow, &array) {
                Ok(sim) => sim,
                Err(err) => fail(N, NAME, &format!("trial {trial} {shape} {dataflow}: {err}")),
            };
            if sim.ofmap.data() != expected.data() {
                fail(
                    N,
                    NAME,
                    &format!("trial {trial} {shape} {dataflow}: output mismatch"),
                );
            }
            let model = analytical_cycles(shape, dataflow, &array).unwrap();
            if sim.total_cycles != model.cycles {
                fail(
                    N,
                    NAME,
                    &format!(
                        "trial {trial} {shape} {dataflow}: simulated {} cycles, model {}",
                        sim.total_cycles, model.cycles
                    ),
                );
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs() >= 60 {
        fail(N, NAME, &format!("took {elapsed:?}, budget is 60s"));
    }
    pass(N, NAME);
}

/// Criterion 2: over an exhaustive grid of small GEMM dimensions and
/// square arrays, simulated cycle counts equal the analytical model
/// exactly.
#[test]
fn criterion_2_exhaustive_cycle_agreement() {
    const N: u32 = 2;
    const NAME: &str = "exhaustive cycle agreement";
    const DIMS: [usize; 6] = [1, 2, 3, 5, 8, 16];
    const SIZES: [usize; 5] = [1, 2, 3, 4, 8];
    let started = Instant::now();
    for t in DIMS {
        for k in DIMS {
            for m in DIMS {
                let shape = GemmShape::new(t, k, m);
                let a = Matrix::from_fn(t, k, |i, j| ((i * 7 + j * 3) % 11) as i64 - 5);
                let b = Matrix::from_fn(k, m, |i, j| ((i * 5 + j * 9) % 11) as i64 - 5);
                for size in SIZES {
                    let array = ArrayConfig::square(size);
                    for dataflow in Dataflow::ALL {
                        let sim = simulate_gemm(&a, &b, dataflow, &array).unwrap();
                        let model = analytical_cycles(shape, dataflow, &array).unwrap();
                        if sim.total_cycles != model.cycles {
                            fail(
                                N,
                                NAME,
                                &format!(
                                    "{shape} on {size}x{size} {dataflow}: simulated {}, model {}",
                                    sim.total_cycles, model.cycles
                                ),
                            );
                        }
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs() >= 120 {
        fail(N, NAME, &format!("took {elapsed:?}, budget is 120s"));
    }
    pass(N, NAME);
}

fn random_layer(rng: &mut StdRng, index: usize) -> LayerDescriptor {
    let ifmap_h = rng.gen_range(1..=32);
    let ifmap_w = rng.gen_range(1..=32);
    let padding = rng.gen_range(0..=2);
    let filter_h = rng.gen_range(1..=5u32.min(ifmap_h + 2 * padding));
    let filter_w = rng.gen_range(1..=5u32.min(ifmap_w + 2 * padding));
    LayerDescriptor {
        name: format!("l{index}"),
        ifmap_h,
        ifmap_w,
        filter_h,
        filter_w,
        channels: rng.gen_range(1..=16),
        num_filters: rng.gen_range(1..=32),
        stride: rng.gen_range(1..=3),
        padding,
    }
}

/// Criterion 3: the per-layer scheduler never loses to the best static
/// dataflow, and matches it exactly when a single dataflow wins every
/// layer.
#[test]
fn criterion_3_scheduler_dominates_static() {
    const N: u32 = 3;
    const NAME: &str = "scheduler dominates static";
    let mut rng = StdRng::seed_from_u64(0xC3);
    for trial in 0..100 {
        let layers: Vec<LayerDescriptor> = (0..rng.gen_range(3..=20))
            .map(|i| random_layer(&mut rng, i))
            .collect();
        let topology = Topology {
            model_name: format!("rand{trial}"),
            layers,
        };
        for size in [8usize, 32] {
            let array = ArrayConfig::square(size);
            let schedule = build_schedule(&topology, &array).unwrap();
            let best_static = Dataflow::ALL
                .into_iter()
                .map(|df| schedule.static_total(df))
                .min()
                .unwrap();
            if schedule.total_flex_cycles > best_static {
                fail(
                    N,
                    NAME,
                    &format!(
                        "trial {trial} on {size}x{size}: flex {} exceeds best static {}",
                        schedule.total_flex_cycles, best_static
                    ),
                );
            }
            let first = schedule.entries[0].chosen;
            if schedule.entries.iter().all(|e| e.chosen == first)
                && schedule.total_flex_cycles != schedule.static_total(first)
            {
                fail(
                    N,
                    NAME,
                    &format!(
                        "trial {trial} on {size}x{size}: {first} wins every layer but flex {} != static {}",
                        schedule.total_flex_cycles,
                        schedule.static_total(first)
                    ),
                );
            }
        }
    }
    pass(N, NAME);
}

/// Criterion 4: weight- and input-stationary execution are duals — the
/// transposed problem costs exactly the same cycles and folds, with the
/// ifmap/filter traffic swapped.
#[test]
fn criterion_4_stationary_duality() {
    const N: u32 = 4;
    const NAME: &str = "stationary duality";
    const DIMS: [usize; 6] = [1, 2, 3, 5, 8, 16];
    const SIZES: [usize; 5] = [1, 2, 3, 4, 8];
    for t in DIMS {
        for k in DIMS {
            for m in DIMS {
                for size in SIZES {
                    let array = ArrayConfig::square(size);
                    let ws = analytical_cycles(
                        GemmShape::new(t, k, m),
                        Dataflow::WeightStationary,
                        &array,
                    )
                    .unwrap();
                    let is = analytical_cycles(
                        GemmShape::new(m, k, t),
                        Dataflow::InputStationary,
                        &array,
                    )
                    .unwrap();
                    let swapped = ws.cycles == is.cycles
                        && ws.fold_count == is.fold_count
                        && ws.memory.sram_reads_ifmap == is.memory.sram_reads_filter
                        && ws.memory.sram_reads_filter == is.memory.sram_reads_ifmap
                        && ws.memory.sram_writes_ofmap == is.memory.sram_writes_ofmap
                        && ws.memory.psum_spill_accesses == is.memory.psum_spill_accesses;
                    if !swapped {
                        fail(
                            N,
                            NAME,
                            &format!("ws {t}x{k}x{m} vs is {m}x{k}x{t} on {size}x{size} differ"),
                        );
                    }
                }
            }
        }
    }
    pass(N, NAME);
}

/// Reference totals: (model, flex, [(dataflow, static, published speedup)]).
type ReferenceRow = (&'static str, u64, [(Dataflow, u64, f64); 3]);

const REFERENCE: [ReferenceRow; 7] = [
    ("alexnet", 859_800, [
        (Dataflow::InputStationary, 1_176_000, 1.368),
        (Dataflow::OutputStationary, 885_200, 1.030),
        (Dataflow::WeightStationary, 1_188_000, 1.382),
    ]),
    ("faster_rcnn", 3_922_000, [
        (Dataflow::InputStationary, 5_640_000, 1.438),
        (Dataflow::OutputStationary, 4_368_000, 1.114),
        (Dataflow::WeightStationary, 4_710_000, 1.201),
    ]),
    ("googlenet", 1_566_000, [
        (Dataflow::InputStationary, 2_525_000, 1.612),
        (Dataflow::OutputStationary, 1_660_000, 1.060),
        (Dataflow::WeightStationary, 1_988_000, 1.269),
    ]),
    ("mobilenet", 1_206_000, [
        (Dataflow::InputStationary, 2_349_000, 1.949),
        (Dataflow::OutputStationary, 1_373_000, 1.139),
        (Dataflow::WeightStationary, 1_531_000, 1.270),
    ]),
    ("resnet18", 1_636_000, [
        (Dataflow::InputStationary, 2_839_000, 1.736),
        (Dataflow::OutputStationary, 1_718_000, 1.051),
        (Dataflow::WeightStationary, 2_520_000, 1.540),
    ]),
    ("vgg13", 21_720_000, [
        (Dataflow::InputStationary, 29_710_000, 1.368),
        (Dataflow::OutputStationary, 22_310_000, 1.027),
        (Dataflow::WeightStationary, 30_460_000, 1.402),
    ]),
    ("yolo_tiny", 2_131_000, [
        (Dataflow::InputStationary, 3_729_000, 1.750),
        (Dataflow::OutputStationary, 2_550_000, 1.196),
        (Dataflow::WeightStationary, 3_337_000, 1.566),
    ]),
];

/// Published per-dataflow mean speedups for the reference workloads.
const REFERENCE_MEANS: [(Dataflow, f64); 3] = [
    (Dataflow::InputStationary, 1.612),
    (Dataflow::OutputStationary, 1.090),
    (Dataflow::WeightStationary, 1.400),
];

/// Criterion 5: speedups computed from the reference cycle totals
/// reproduce every published per-model ratio to ±0.001 and the
/// per-dataflow means to ±0.03.
#[test]
fn criterion_5_reference_speedup_table() {
    const N: u32 = 5;
    const NAME: &str = "reference speedup table";
    let mut failures = Vec::new();
    let mut sums = [0f64; 3];
    for (model, flex, rows) in REFERENCE {
        for (slot, (dataflow, static_cycles, published)) in rows.into_iter().enumerate() {
            let computed = speedup(static_cycles, flex);
            sums[slot] += computed;
            let delta = (computed - published).abs();
            if delta > 0.001 {
                failures.push(format!(
                    "{model} {dataflow}: computed {computed:.6}, published {published:.3} (off by {delta:.6})"
                ));
            }
        }
    }
    for (slot, (dataflow, published)) in REFERENCE_MEANS.into_iter().enumerate() {
        let mean = sums[slot] / REFERENCE.len() as f64;
        let delta = (mean - published).abs();
        if delta > 0.03 {
            failures.push(format!(
                "{dataflow} mean: computed {mean:.6}, published {published:.3} (off by {delta:.6})"
            ));
        }
    }
    if failures.is_empty() {
        pass(N, NAME);
    } else {
        fail(N, NAME, &failures.join("; "));
    }
}

/// Criterion 6: cycle totals convert to the published wall-clock times at
/// the static and flexible clock periods.
#[test]
fn criterion_6_execution_time_conversion() {
    const N: u32 = 6;
    const NAME: &str = "execution time conversion";
    let flex_ms = execution_time_ms(1_636_000, FLEX_CLOCK_NS);
    if (flex_ms - 10.94).abs() > 0.01 {
        fail(N, NAME, &format!("flex time {flex_ms:.6} ms, expected 10.94 ± 0.01"));
    }
    let static_ms = execution_time_ms(2_839_000, STATIC_CLOCK_NS);
    if (static_ms - 18.82).abs() > 0.01 {
        fail(N, NAME, &format!("static time {static_ms:.6} ms, expected 18.82 ± 0.01"));
    }
    pass(N, NAME);
}

/// Criterion 7: the bundled 21-layer residual network schedules
/// heterogeneously on a 32x32 array — weight-stationary for the large
/// early feature maps, input-/output-stationary late — and the flexible
/// advantage over static output-stationary grows with array size.
#[test]
fn criterion_7_heterogeneous_schedule() {
    const N: u32 = 7;
    const NAME: &str = "heterogeneous schedule";
    let topology = load_resnet();
    let array = ArrayConfig::square(32);
    let schedule = build_schedule(&topology, &array).unwrap();

    let mut chosen: Vec<Dataflow> = schedule.entries.iter().map(|e| e.chosen).collect();
    chosen.sort_by_key(|df| df.token());
    chosen.dedup();
    if chosen.len() < 2 {
        fail(N, NAME, &format!("schedule uses only {chosen:?}"));
    }

    for (layer, entry) in topology.layers.iter().zip(&schedule.entries) {
        if layer.ifmap_h >= 56 && entry.chosen != Dataflow::WeightStationary {
            fail(
                N,
                NAME,
                &format!(
                    "layer {} (ifmap {}x{}) chose {}, expected ws",
                    layer.name, layer.ifmap_h, layer.ifmap_w, entry.chosen
                ),
            );
        }
    }

    let tail_has_stationary_late = schedule
        .entries
        .iter()
        .rev()
        .take(5)
        .any(|e| matches!(e.chosen, Dataflow::InputStationary | Dataflow::OutputStationary));
    if !tail_has_stationary_late {
        fail(N, NAME, "none of the last five layers chose is/os");
    }

    if schedule.total_flex_cycles != 2_068_024 {
        fail(
            N,
            NAME,
            &format!("flex total {} != expected 2068024", schedule.total_flex_cycles),
        );
    }
    let os_total = schedule.static_total(Dataflow::OutputStationary);
    if os_total != 2_207_328 {
        fail(N, NAME, &format!("os total {os_total} != expected 2207328"));
    }

    let speedup_at = |size: usize| {
        let report = ModelReport::build(&topology, size, size, STATIC_CLOCK_NS, FLEX_CLOCK_NS)
            .unwrap();
        report.speedup_vs(Dataflow::OutputStationary)
    };
    let s32 = speedup_at(32);
    let s128 = speedup_at(128);
    let s256 = speedup_at(256);
    if s128 < s32 || s256 < s32 {
        fail(
            N,
            NAME,
            &format!("speedup should not shrink with array size: 32²={s32:.4}, 128²={s128:.4}, 256²={s256:.4}"),
        );
    }
    pass(N, NAME);
}

/// Criterion 8: repeated invocations of the binary produce byte-identical
/// CSV files.
#[test]
fn criterion_8_reproducible_outputs() {
    const N: u32 = 8;
    const NAME: &str = "reproducible outputs";
    let dir = tempfile::tempdir().unwrap();
    let resnet = resnet_path();
    let resnet = resnet.to_str().unwrap();

    let run_once = |tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let report = dir.path().join(format!("report_{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_flexsim"))
            .args(["run", "--topology", resnet, "--rows", "32", "--cols", "32"])
            .args(["--out", report.to_str().unwrap()])
            .status()
            .expect("binary should spawn");
        assert!(status.success(), "run invocation failed");

        let table = dir.path().join(format!("table_{tag}.csv"));
        let times = dir.path().join(format!("times_{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_flexsim"))
            .args(["table", resnet, "--rows", "32", "--cols", "32"])
            .args(["--out", table.to_str().unwrap()])
            .args(["--times-out", times.to_str().unwrap()])
            .status()
            .expect("binary should spawn");
        assert!(status.success(), "table invocation failed");

        (
            fs::read(&report).unwrap(),
            fs::read(&table).unwrap(),
            fs::read(&times).unwrap(),
        )
    };

    let first = run_once("a");
    let second = run_once("b");
    if first != second {
        fail(N, NAME, "repeated runs produced different bytes");
    }
    pass(N, NAME);
}
