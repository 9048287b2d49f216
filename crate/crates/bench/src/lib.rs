//! Criterion benchmarks for the kerrspec solvers; see `benches/`.
