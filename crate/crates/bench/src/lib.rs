//! Criterion benchmarks for the `cogen` pipeline live in `benches/`.
