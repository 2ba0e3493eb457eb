//! Criterion benchmarks for `mfmab-core`; see `benches/`.
