//! Benchmark harness for the model crate; see `benches/`.
