//! Criterion benchmarks for `relcode-core`; see `benches/`.
