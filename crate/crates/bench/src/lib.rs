//! Criterion benchmarks for the discrete solver live in `benches/`.
