//! Criterion benchmarks for `satkey-core`; see `benches/`.
