//! Criterion benches live under `benches/`; run them with `cargo bench -p depthlab-bench`.
