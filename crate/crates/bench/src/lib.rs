//! Fixture helpers for the flexsim benchmarks.

use flexsim_core::{parse_topology, Matrix, Topology};

/// Deterministic operand pair for a `t x k` by `k x m` GEMM, with small
/// values that cannot overflow the default accumulator.
pub fn operands(t: usize, k: usize, m: usize) -> (Matrix, Matrix) {
    let a = Matrix::from_fn(t, k, |i, j| ((i * 7 + j * 3) % 11) as i64 - 5);
    let b = Matrix::from_fn(k, m, |i, j| ((i * 5 + j * 9) % 11) as i64 - 5);
    (a, b)
}

/// The bundled 21-layer residual-network topology.
pub fn resnet18() -> Topology {
    parse_topology(
        include_str!("../../../topologies/resnet18.csv"),
        "resnet18",
    )
    .expect("bundled topology should parse")
}
