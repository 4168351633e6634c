//! Criterion benchmarks for `foldnoise`; see `benches/`.
