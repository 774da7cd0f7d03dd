//! Criterion benchmarks for the armgap inner loops live in `benches/`.
