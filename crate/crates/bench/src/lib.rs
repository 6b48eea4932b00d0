//! Criterion benchmarks for `hedonic-core`; see `benches/`.
