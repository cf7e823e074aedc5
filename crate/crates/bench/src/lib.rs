//! Criterion benchmarks for nagell-core live under `benches/`.
