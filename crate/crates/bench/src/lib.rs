//! Criterion benchmarks for heislab-core live in `benches/`; run with `cargo bench -p heislab-bench`.
