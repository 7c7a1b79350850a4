//! Benchmark-only crate; see `benches/core.rs`. Run with `cargo bench -p hbr-bench`.
