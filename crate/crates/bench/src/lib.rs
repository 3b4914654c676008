//! Criterion benchmarks for selfsim-core live in `benches/`.
